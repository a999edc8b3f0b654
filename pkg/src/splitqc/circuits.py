"""Gate and circuit value objects.

Qubit 0 is the least-significant bit of the amplitude index, fixed repo-wide.
Rotation conventions: RY(theta) = exp(-i theta Y/2) and likewise for RX/RZ;
U3(theta, phi, lam) is the standard three-angle form with cos(theta/2) on the
diagonal. Two-qubit gates list the control (or first) qubit first.

Circuits are immutable after construction. Gate parameters are either bound
floats (radians) or `Sym` references into the circuit's parameter vector.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

# number of target qubits and parameter slots per gate kind
GATE_TARGETS = {
    "RX": 1, "RY": 1, "RZ": 1, "U3": 1, "H": 1, "X": 1,
    "CX": 2, "CZ": 2, "SWAP": 2, "UNITARY1": 1, "UNITARY2": 2,
}
GATE_PARAMS = {
    "RX": 1, "RY": 1, "RZ": 1, "U3": 3, "H": 0, "X": 0,
    "CX": 0, "CZ": 0, "SWAP": 0, "UNITARY1": 0, "UNITARY2": 0,
}
PAULI_ROTATIONS = ("RX", "RY", "RZ")


@dataclass(frozen=True)
class Sym:
    """Reference to position `index` of the circuit's parameter vector."""

    index: int

    def __post_init__(self):
        if not isinstance(self.index, int) or self.index < 0:
            raise ValueError(f"parameter index must be a non-negative int, got {self.index!r}")


class Gate:
    """One gate instance: a kind, target qubits, and bound or symbolic params."""

    __slots__ = ("kind", "targets", "params", "matrix")

    def __init__(self, kind: str, targets: tuple, params: tuple = (), matrix=None):
        if kind not in GATE_TARGETS:
            raise ValueError(f"unknown gate kind {kind!r}")
        targets = tuple(int(t) for t in targets)
        if len(targets) != GATE_TARGETS[kind]:
            raise ValueError(f"{kind} takes {GATE_TARGETS[kind]} target(s), got {targets}")
        if len(set(targets)) != len(targets):
            raise ValueError(f"{kind} targets must be distinct, got {targets}")
        if any(t < 0 for t in targets):
            raise ValueError(f"negative target in {targets}")
        if len(params) != GATE_PARAMS[kind]:
            raise ValueError(f"{kind} takes {GATE_PARAMS[kind]} parameter(s), got {len(params)}")
        checked = []
        for p in params:
            if isinstance(p, Sym):
                checked.append(p)
            else:
                value = float(p)
                if not np.isfinite(value):
                    raise ValueError(f"non-finite gate angle {p!r}")
                checked.append(value)
        if kind in ("UNITARY1", "UNITARY2"):
            dim = 2 if kind == "UNITARY1" else 4
            matrix = np.asarray(matrix, dtype=np.complex128)
            if matrix.shape != (dim, dim):
                raise ValueError(f"{kind} needs a {dim}x{dim} matrix, got shape {matrix.shape}")
            dev = np.max(np.abs(matrix @ matrix.conj().T - np.eye(dim)))
            if dev > 1e-9:
                raise ValueError(f"{kind} matrix is not unitary (deviation {dev:.2e})")
            matrix = matrix.copy()
            matrix.flags.writeable = False
        elif matrix is not None:
            raise ValueError(f"{kind} does not take a matrix")
        object.__setattr__(self, "kind", kind)
        object.__setattr__(self, "targets", targets)
        object.__setattr__(self, "params", tuple(checked))
        object.__setattr__(self, "matrix", matrix)

    def __setattr__(self, name, value):
        raise AttributeError("Gate is immutable")

    @property
    def is_symbolic(self) -> bool:
        return any(isinstance(p, Sym) for p in self.params)

    def sym_indices(self) -> tuple:
        return tuple(p.index for p in self.params if isinstance(p, Sym))

    def bound_angles(self, params) -> tuple:
        """Resolve `Sym` slots against a parameter vector."""
        return tuple(params[p.index] if isinstance(p, Sym) else p for p in self.params)

    def __eq__(self, other):
        if not isinstance(other, Gate):
            return NotImplemented
        if (self.kind, self.targets, self.params) != (other.kind, other.targets, other.params):
            return False
        if self.matrix is None:
            return other.matrix is None
        return other.matrix is not None and np.array_equal(self.matrix, other.matrix)

    def __hash__(self):
        return hash((self.kind, self.targets, self.params))

    def __repr__(self):
        parts = [str(t) for t in self.targets]
        for p in self.params:
            parts.append(f"p{p.index}" if isinstance(p, Sym) else f"{p:.6g}")
        return f"Gate({self.kind} {' '.join(parts)})"


def _angle(value):
    return value if isinstance(value, Sym) else float(value)


def rx(theta, q: int) -> Gate:
    return Gate("RX", (q,), (_angle(theta),))


def ry(theta, q: int) -> Gate:
    return Gate("RY", (q,), (_angle(theta),))


def rz(theta, q: int) -> Gate:
    return Gate("RZ", (q,), (_angle(theta),))


def u3(theta, phi, lam, q: int) -> Gate:
    return Gate("U3", (q,), (_angle(theta), _angle(phi), _angle(lam)))


def h(q: int) -> Gate:
    return Gate("H", (q,))


def x(q: int) -> Gate:
    return Gate("X", (q,))


def cx(control: int, target: int) -> Gate:
    return Gate("CX", (control, target))


def cz(a: int, b: int) -> Gate:
    return Gate("CZ", (a, b))


def swap(a: int, b: int) -> Gate:
    return Gate("SWAP", (a, b))


def unitary1(matrix, q: int) -> Gate:
    return Gate("UNITARY1", (q,), matrix=matrix)


def unitary2(matrix, a: int, b: int) -> Gate:
    """4x4 unitary on qubits (a, b); a indexes the more significant matrix bit."""
    return Gate("UNITARY2", (a, b), matrix=matrix)


class Circuit:
    """Ordered gate list over a fixed register with `num_params` symbolic slots.

    Every symbolic index in [0, num_params) must occur in at least one gate;
    gaps almost always indicate a builder bug, so they are rejected.
    """

    __slots__ = ("num_qubits", "gates", "num_params", "_occurrences")

    def __init__(self, num_qubits: int, gates, num_params: int | None = None):
        num_qubits = int(num_qubits)
        if num_qubits < 1:
            raise ValueError(f"num_qubits must be >= 1, got {num_qubits}")
        gates = tuple(gates)
        seen: dict[int, list] = {}
        for pos, gate in enumerate(gates):
            if not isinstance(gate, Gate):
                raise TypeError(f"gates[{pos}] is {type(gate).__name__}, expected Gate")
            for t in gate.targets:
                if t >= num_qubits:
                    raise ValueError(f"gates[{pos}] targets qubit {t} on a {num_qubits}-qubit register")
            for slot, p in enumerate(gate.params):
                if isinstance(p, Sym):
                    seen.setdefault(p.index, []).append((pos, slot))
        inferred = max(seen) + 1 if seen else 0
        if num_params is None:
            num_params = inferred
        elif num_params < inferred:
            raise ValueError(f"num_params={num_params} but parameter index {inferred - 1} is used")
        missing = sorted(set(range(num_params)) - seen.keys())
        if missing:
            raise ValueError(f"parameter indices never used: {missing}")
        object.__setattr__(self, "num_qubits", num_qubits)
        object.__setattr__(self, "gates", gates)
        object.__setattr__(self, "num_params", int(num_params))
        object.__setattr__(self, "_occurrences", seen)

    def __setattr__(self, name, value):
        raise AttributeError("Circuit is immutable")

    def __len__(self):
        return len(self.gates)

    def __iter__(self):
        return iter(self.gates)

    def __eq__(self, other):
        if not isinstance(other, Circuit):
            return NotImplemented
        return (self.num_qubits == other.num_qubits
                and self.num_params == other.num_params
                and self.gates == other.gates)

    def param_occurrences(self, index: int) -> list:
        """(gate position, param slot) pairs where parameter `index` appears."""
        return list(self._occurrences.get(index, ()))

    def remap_qubits(self, mapping: dict, num_qubits: int | None = None) -> "Circuit":
        """Relabel targets through `mapping`; used when placing blocks or layouts."""
        new_gates = [
            Gate(g.kind, tuple(mapping[t] for t in g.targets), g.params, g.matrix)
            for g in self.gates
        ]
        return Circuit(num_qubits or self.num_qubits, new_gates, self.num_params)

    def two_qubit_edges(self) -> list:
        """Undirected interaction edges, one entry per two-qubit gate."""
        return [tuple(sorted(g.targets)) for g in self.gates if len(g.targets) == 2]

    def to_text(self) -> str:
        lines = [f"qubits {self.num_qubits}", f"params {self.num_params}"]
        for g in self.gates:
            parts = [g.kind] + [str(t) for t in g.targets]
            for p in g.params:
                parts.append(f"p{p.index}" if isinstance(p, Sym) else format(p, ".17g"))
            if g.matrix is not None:
                flat = g.matrix.ravel()
                parts.append("mat")
                parts.extend(format(v, ".17g") for z in flat for v in (z.real, z.imag))
            lines.append(" ".join(parts))
        return "\n".join(lines) + "\n"

    def __repr__(self):
        return (f"Circuit(num_qubits={self.num_qubits}, gates={len(self.gates)}, "
                f"num_params={self.num_params})")

    @classmethod
    def from_text(cls, text: str) -> "Circuit":
        lines = [ln.strip() for ln in text.splitlines() if ln.strip() and not ln.startswith("#")]
        if len(lines) < 2 or not lines[0].startswith("qubits ") or not lines[1].startswith("params "):
            raise ValueError("circuit text must start with 'qubits N' and 'params P' lines")
        num_qubits = int(lines[0].split()[1])
        num_params = int(lines[1].split()[1])
        gates = []
        for ln in lines[2:]:
            tokens = ln.split()
            kind = tokens[0]
            if kind not in GATE_TARGETS:
                raise ValueError(f"unknown gate kind in line {ln!r}")
            nt, np_ = GATE_TARGETS[kind], GATE_PARAMS[kind]
            targets = tuple(int(t) for t in tokens[1:1 + nt])
            params = []
            for tok in tokens[1 + nt:1 + nt + np_]:
                params.append(Sym(int(tok[1:])) if tok.startswith("p") else float(tok))
            matrix = None
            rest = tokens[1 + nt + np_:]
            if rest:
                if rest[0] != "mat":
                    raise ValueError(f"unexpected tokens in line {ln!r}")
                vals = [float(v) for v in rest[1:]]
                dim = 2 if kind == "UNITARY1" else 4
                if len(vals) != 2 * dim * dim:
                    raise ValueError(f"bad matrix payload in line {ln!r}")
                arr = np.array(vals[0::2]) + 1j * np.array(vals[1::2])
                matrix = arr.reshape(dim, dim)
            gates.append(Gate(kind, targets, tuple(params), matrix))
        return cls(num_qubits, gates, num_params)


def interaction_components(circuit: Circuit) -> list:
    """Connected components of the two-qubit interaction graph, each a sorted
    qubit tuple; isolated qubits form singleton components."""
    parent = list(range(circuit.num_qubits))

    def find(a):
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    for a, b in circuit.two_qubit_edges():
        ra, rb = find(a), find(b)
        if ra != rb:
            parent[rb] = ra
    groups: dict[int, list] = {}
    for q in range(circuit.num_qubits):
        groups.setdefault(find(q), []).append(q)
    return sorted(tuple(sorted(g)) for g in groups.values())
