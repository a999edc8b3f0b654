"""Circuit family builders: split, extended-split and full-width ansaetze.

Shared layout rules, fixed so parameter vectors are portable:
  - parameter indexing is layer-major, then qubit-major (and angle-major
    inside a U3 triple);
  - every rotation column spans the full register in ascending qubit order,
    whether or not the layer is split into blocks;
  - entangling gates never cross block boundaries while T = 0.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .circuits import Circuit, Gate, Sym, cx, cz, ry

FAMILY_NAMES = ("ladder_ry_cx", "efficient_su2_full", "efficient_su2_linear", "hea_u3")


@dataclass(frozen=True)
class _Family:
    prefix_rots: tuple      # one column per entry, applied once before all layers
    unit_rots: tuple        # rotation columns inside each layer
    rot_first: bool         # rotations before the entangler within a layer
    suffix_rots: tuple      # columns appended after the last layer
    entangler: str          # chain | full | brick
    two_qubit: str          # CX or CZ


_FAMILIES = {
    "ladder_ry_cx": _Family((), ("RY",), True, (), "chain", "CX"),
    "efficient_su2_full": _Family((), ("RY", "RZ"), True, ("RY", "RZ"), "full", "CX"),
    "efficient_su2_linear": _Family((), ("RY", "RZ"), True, ("RY", "RZ"), "chain", "CX"),
    "hea_u3": _Family(("U3",), ("U3",), False, (), "brick", "CZ"),
}
_ANGLES_PER_GATE = {"RY": 1, "RZ": 1, "RX": 1, "U3": 3}


@dataclass(frozen=True)
class SplitSpec:
    """Shape of a (possibly extended) split ansatz.

    L split layers over k = N/m disjoint blocks, then T full-width layers.
    T = 0 is the pure split ansatz; m = N recovers the standard one.
    """

    num_qubits: int
    block_size: int
    cs_layers: int
    standard_layers: int = 0
    block_family: str = "ladder_ry_cx"

    def __post_init__(self):
        n, m = self.num_qubits, self.block_size
        if n < 1:
            raise ValueError(f"num_qubits must be >= 1, got {n}")
        if m < 1 or n % m != 0:
            raise ValueError(f"block_size {m} must divide num_qubits {n}")
        if self.cs_layers < 0 or self.standard_layers < 0:
            raise ValueError("layer counts must be >= 0")
        if self.cs_layers == 0 and self.standard_layers == 0:
            raise ValueError("need at least one layer")
        if self.block_family not in _FAMILIES:
            raise ValueError(f"unknown block family {self.block_family!r}; options: {FAMILY_NAMES}")

    @property
    def num_blocks(self) -> int:
        return self.num_qubits // self.block_size

    @property
    def blocks(self) -> tuple:
        m = self.block_size
        return tuple(tuple(range(b * m, (b + 1) * m)) for b in range(self.num_blocks))


def _entangler_gates(kind: str, pattern: str, qubits, layer_index: int):
    qs = list(qubits)
    pair = cx if kind == "CX" else cz
    if len(qs) < 2:
        return []
    if pattern == "chain":
        return [pair(qs[i], qs[i + 1]) for i in range(len(qs) - 1)]
    if pattern == "full":
        return [pair(qs[i], qs[j]) for i in range(len(qs)) for j in range(i + 1, len(qs))]
    if pattern == "brick":
        start = layer_index % 2
        return [pair(qs[i], qs[i + 1]) for i in range(start, len(qs) - 1, 2)]
    raise ValueError(f"unknown entangler pattern {pattern!r}")


def _rot_column(kind: str, qubits, base: int):
    """One rotation column; returns (gates, params consumed)."""
    w = _ANGLES_PER_GATE[kind]
    gates = []
    for pos, q in enumerate(qubits):
        syms = tuple(Sym(base + w * pos + s) for s in range(w))
        gates.append(Gate(kind, (q,), syms))
    return gates, w * len(qubits)


def _build(n: int, blocks, layers: int, tail_layers: int, family: _Family,
           tail_family: _Family) -> Circuit:
    """Generic constructor: `layers` block-local layers, then `tail_layers`
    full-width layers, sharing the family's rotation-column structure."""
    if tail_layers and tail_family.unit_rots != family.unit_rots:
        raise ValueError("tail family must share the rotation structure of the block family")
    full = tuple(range(n))
    gates: list[Gate] = []
    base = 0
    for kind in family.prefix_rots:
        col, used = _rot_column(kind, full, base)
        gates.extend(col)
        base += used

    def unit(layer_index: int, groups, fam: _Family):
        nonlocal base
        rot_cols = []
        for kind in fam.unit_rots:
            col, used = _rot_column(kind, full, base)
            rot_cols.extend(col)
            base += used
        ent = []
        for g in groups:
            ent.extend(_entangler_gates(fam.two_qubit, fam.entangler, g, layer_index))
        if fam.rot_first:
            gates.extend(rot_cols)
            gates.extend(ent)
        else:
            gates.extend(ent)
            gates.extend(rot_cols)

    for l in range(layers):
        unit(l, blocks, family)
    for t in range(tail_layers):
        unit(layers + t, (full,), tail_family)
    for kind in family.suffix_rots:
        col, used = _rot_column(kind, full, base)
        gates.extend(col)
        base += used
    return Circuit(n, gates, base)


def build_ladder_ry_cx(num_qubits: int, layers: int) -> Circuit:
    """Per layer: one symbolic RY per qubit, then CX(i, i+1) for i = 0..n-2."""
    if num_qubits < 1:
        raise ValueError(f"num_qubits must be >= 1, got {num_qubits}")
    if layers < 1:
        raise ValueError(f"layers must be >= 1, got {layers}")
    fam = _FAMILIES["ladder_ry_cx"]
    return _build(num_qubits, (tuple(range(num_qubits)),), layers, 0, fam, fam)


def build_cs(spec: SplitSpec) -> Circuit:
    """Split ansatz: k = N/m independent blocks, no cross-block gates."""
    if spec.standard_layers != 0:
        raise ValueError("build_cs requires standard_layers == 0; use build_ecs")
    fam = _FAMILIES[spec.block_family]
    return _build(spec.num_qubits, spec.blocks, spec.cs_layers, 0, fam, fam)


def build_ecs(spec: SplitSpec, tail_family: str | None = None) -> Circuit:
    """Extended split ansatz: L split layers, then T >= 1 full-width layers.

    The tail defaults to the fully entangled variant of the block family's
    rotation structure.
    """
    if spec.standard_layers < 1:
        raise ValueError("build_ecs requires standard_layers >= 1")
    fam = _FAMILIES[spec.block_family]
    if tail_family is None:
        tail_family = "efficient_su2_full" if spec.block_family.startswith("efficient_su2") \
            else spec.block_family
    if tail_family not in _FAMILIES:
        raise ValueError(f"unknown tail family {tail_family!r}")
    return _build(spec.num_qubits, spec.blocks, spec.cs_layers, spec.standard_layers,
                  fam, _FAMILIES[tail_family])


def build_efficient_su2(num_qubits: int, depth: int, entanglement: str = "full") -> Circuit:
    """RY+RZ columns and a CX entangler per repetition, plus a final rotation
    pair; 2n(depth+1) parameters."""
    if num_qubits < 2:
        raise ValueError(f"num_qubits must be >= 2, got {num_qubits}")
    if depth < 1:
        raise ValueError(f"depth must be >= 1, got {depth}")
    if entanglement not in ("full", "linear"):
        raise ValueError(f"entanglement must be 'full' or 'linear', got {entanglement!r}")
    fam = _FAMILIES[f"efficient_su2_{entanglement}"]
    return _build(num_qubits, (tuple(range(num_qubits)),), depth, 0, fam, fam)


@dataclass(frozen=True)
class HeaAnsatz:
    """Hardware-efficient U3 ansatz split into its two parameter groups.

    group_a: indices of the first U3 column (sampled per data point);
    group_b: indices of the remaining layers (trained or loaded per class).
    """

    circuit: Circuit
    group_a: np.ndarray
    group_b: np.ndarray


def build_hea_u3(num_qubits: int, depth: int) -> HeaAnsatz:
    """First U3 column (group A), then `depth` layers of a brick CZ entangler
    with alternating offsets followed by a U3 column (group B)."""
    if num_qubits < 2:
        raise ValueError(f"num_qubits must be >= 2, got {num_qubits}")
    if depth < 1:
        raise ValueError(f"depth must be >= 1, got {depth}")
    fam = _FAMILIES["hea_u3"]
    circuit = _build(num_qubits, (tuple(range(num_qubits)),), depth, 0, fam, fam)
    na = 3 * num_qubits
    return HeaAnsatz(circuit, np.arange(na), np.arange(na, circuit.num_params))


def encode_features(features) -> Circuit:
    """One bound RY(x_i) on qubit i; product-state feature encoding."""
    features = np.asarray(features, dtype=np.float64)
    if features.ndim != 1 or features.size == 0:
        raise ValueError(f"features must be a non-empty 1-D vector, got shape {features.shape}")
    return Circuit(features.size, [ry(float(v), q) for q, v in enumerate(features)], 0)


@dataclass(frozen=True)
class BlockView:
    """One block of a split circuit, reindexed to local qubits.

    Running `circuit` with global_params[param_map] reproduces the block's
    action on its own qubits.
    """

    qubits: tuple
    circuit: Circuit
    param_map: np.ndarray


def project_blocks(circuit: Circuit, blocks) -> list:
    """Split a block-diagonal circuit into per-block views.

    Errors if any gate spans two blocks or targets a qubit outside every
    block, since then the circuit is not block-diagonal over `blocks`.
    """
    blocks = [tuple(sorted(int(q) for q in b)) for b in blocks]
    owner = {}
    for i, b in enumerate(blocks):
        for q in b:
            if q in owner:
                raise ValueError(f"qubit {q} appears in two blocks")
            owner[q] = i
    per_block_gates: list[list[Gate]] = [[] for _ in blocks]
    local_maps: list[dict] = [{} for _ in blocks]
    for pos, gate in enumerate(circuit.gates):
        owners = {owner.get(t) for t in gate.targets}
        if len(owners) != 1 or None in owners:
            raise ValueError(f"gate {gate!r} at position {pos} is not contained in one block")
        b = owners.pop()
        qmap = {q: j for j, q in enumerate(blocks[b])}
        new_params = []
        for p in gate.params:
            if isinstance(p, Sym):
                local = local_maps[b].setdefault(p.index, len(local_maps[b]))
                new_params.append(Sym(local))
            else:
                new_params.append(p)
        per_block_gates[b].append(
            Gate(gate.kind, tuple(qmap[t] for t in gate.targets), tuple(new_params), gate.matrix))
    views = []
    for b, block in enumerate(blocks):
        pmap = np.empty(len(local_maps[b]), dtype=np.int64)
        for global_idx, local_idx in local_maps[b].items():
            pmap[local_idx] = global_idx
        views.append(BlockView(block, Circuit(len(block), per_block_gates[b], len(pmap)), pmap))
    return views


def split_observable(obs, blocks):
    """Per-block reindexed observables, or None if any term crosses blocks.

    Identity terms attach to block 0. When this succeeds, the full cost is
    exactly the sum of the per-block costs.
    """
    from .observables import Observable

    blocks = [tuple(sorted(int(q) for q in b)) for b in blocks]
    sets = [set(b) for b in blocks]
    per_block = [[] for _ in blocks]
    for coeff, paulis in obs.terms:
        if not paulis:
            per_block[0].append((coeff, {}))
            continue
        qs = {q for q, _ in paulis}
        home = next((i for i, s in enumerate(sets) if qs <= s), None)
        if home is None:
            return None
        order = {q: j for j, q in enumerate(blocks[home])}
        per_block[home].append((coeff, {order[q]: ax for q, ax in paulis}))
    return [Observable(terms) if terms else Observable([(0.0, {0: "Z"})]) for terms in per_block]
