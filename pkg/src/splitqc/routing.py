"""Routing onto square-grid devices.

Logical circuits are mapped to a rows x cols lattice with 4-neighbor
connectivity; two-qubit gates on non-adjacent cells get SWAPs inserted by a
greedy heuristic (distance-sum reduction over a lookahead window). Several
initial layouts are tried (snake, block-packed, random restarts) and the
cheapest routed result wins. SWAPs are priced at 3 CX when counting.
"""
from __future__ import annotations

import csv
import io
from dataclasses import dataclass

import numpy as np

from ._seeding import rng_for
from .ansatz import SplitSpec, build_cs
from .circuits import Circuit, Gate, interaction_components

SWAP_COST = 3
LOOKAHEAD = 4
_DECAY = 0.5

COUNTS_SCHEMA = "splitqc.transpile.v1"
COUNTS_COLUMNS = ("family", "m", "l", "n", "rows", "cols",
                  "native_two_qubit", "swap_count", "cx_count")


class GridTopology:
    """rows x cols cells, numbered row-major; edges join horizontal and
    vertical neighbors only."""

    def __init__(self, rows: int, cols: int):
        rows, cols = int(rows), int(cols)
        if rows < 1 or cols < 1:
            raise ValueError(f"grid must be at least 1x1, got {rows}x{cols}")
        if rows * cols < 2:
            raise ValueError("grid needs at least two cells")
        self.rows = rows
        self.cols = cols
        self.num_cells = rows * cols
        edges = []
        for r in range(rows):
            for c in range(cols):
                p = r * cols + c
                if c + 1 < cols:
                    edges.append((p, p + 1))
                if r + 1 < rows:
                    edges.append((p, p + cols))
        self.edges = frozenset(edges)
        self.neighbors = tuple(
            tuple(sorted(b if a == p else a for a, b in edges if p in (a, b)))
            for p in range(self.num_cells))
        rr, cc = np.divmod(np.arange(self.num_cells), cols)
        self.dist = (np.abs(rr[:, None] - rr[None, :])
                     + np.abs(cc[:, None] - cc[None, :])).astype(np.int64)

    def snake_order(self) -> list:
        """Cells along the boustrophedon path; consecutive entries adjacent."""
        order = []
        for r in range(self.rows):
            row = range(self.cols) if r % 2 == 0 else range(self.cols - 1, -1, -1)
            order.extend(r * self.cols + c for c in row)
        return order

    def __repr__(self):
        return f"GridTopology({self.rows}, {self.cols})"


@dataclass(frozen=True)
class RoutedCircuit:
    circuit: Circuit          # over the physical cells
    topology: GridTopology
    initial_layout: tuple     # logical qubit -> cell before any gate
    final_layout: tuple       # logical qubit -> cell after all gates
    native_two_qubit: int     # two-qubit gates of the source circuit
    swap_count: int

    @property
    def cx_count(self) -> int:
        return self.native_two_qubit + SWAP_COST * self.swap_count


# ---------------------------------------------------------------- layouts

def snake_layout(circuit: Circuit, topo: GridTopology) -> list:
    order = topo.snake_order()
    return [order[q] for q in range(circuit.num_qubits)]


def block_layout(circuit: Circuit, topo: GridTopology) -> list:
    """Interaction components packed onto contiguous cells: 2x2 tiles when
    every component has four qubits and the grid tiles evenly, snake-path
    segments otherwise (which makes 2-qubit components always adjacent)."""
    comps = interaction_components(circuit)
    layout = [-1] * circuit.num_qubits
    if (all(len(c) == 4 for c in comps)
            and topo.rows % 2 == 0 and topo.cols % 2 == 0):
        tiles = []
        for tr in range(0, topo.rows, 2):
            for tc in range(0, topo.cols, 2):
                p = tr * topo.cols + tc
                # cycle order keeps consecutive qubits on tile edges
                tiles.append((p, p + 1, p + 1 + topo.cols, p + topo.cols))
        for comp, tile in zip(comps, tiles):
            for q, cell in zip(comp, tile):
                layout[q] = cell
        if -1 not in layout:
            return layout
        layout = [-1] * circuit.num_qubits
    order = topo.snake_order()
    pos = 0
    for comp in comps:
        for q in comp:
            layout[q] = order[pos]
            pos += 1
    return layout


def random_layout(circuit: Circuit, topo: GridTopology, rng) -> list:
    return rng.permutation(topo.num_cells)[: circuit.num_qubits].tolist()


# ---------------------------------------------------------------- routing

def _route_with_layout(circuit: Circuit, topo: GridTopology, layout):
    phys_of = list(layout)
    initial = tuple(phys_of)
    dist = topo.dist
    # upcoming two-qubit endpoints, consumed front to back by the lookahead
    pairs = [g.targets for g in circuit.gates if len(g.targets) == 2]
    weights = [_DECAY ** i for i in range(LOOKAHEAD)]

    out = []
    swaps = 0
    native = 0
    next_pair = 0
    for gate in circuit.gates:
        if len(gate.targets) == 1:
            out.append(Gate(gate.kind, (phys_of[gate.targets[0]],), gate.params, gate.matrix))
            continue
        next_pair += 1
        a, b = gate.targets
        stuck = 0
        stuck_limit = 4 * (topo.rows + topo.cols)
        while dist[phys_of[a], phys_of[b]] > 1:
            pa, pb = phys_of[a], phys_of[b]
            window = pairs[next_pair - 1:next_pair - 1 + LOOKAHEAD]
            best = None
            if stuck <= stuck_limit:
                for end in (pa, pb):
                    for nb in topo.neighbors[end]:
                        score = 0.0
                        for w, (la, lb) in zip(weights, window):
                            qa, qb = phys_of[la], phys_of[lb]
                            if qa == end:
                                qa = nb
                            elif qa == nb:
                                qa = end
                            if qb == end:
                                qb = nb
                            elif qb == nb:
                                qb = end
                            score += w * (dist[qa, qb] - dist[phys_of[la], phys_of[lb]])
                        key = (score, min(end, nb), max(end, nb))
                        if best is None or key < best[0]:
                            best = (key, end, nb)
            if best is not None and best[0][0] < 0.0:
                _, end, nb = best
            else:
                # no net win in the window (or stuck too long): force progress
                # on the current gate along a shortest path
                end, nb = min(
                    ((e, n) for e in (pa, pb) for n in topo.neighbors[e]
                     if dist[n if e == pa else pa, n if e == pb else pb] < dist[pa, pb]),
                )
            stuck += 1
            out.append(Gate("SWAP", (end, nb)))
            swaps += 1
            inv = {p: q for q, p in enumerate(phys_of) if p in (end, nb)}
            if end in inv:
                phys_of[inv[end]] = nb
            if nb in inv:
                phys_of[inv[nb]] = end
        native += 1
        out.append(Gate(gate.kind, (phys_of[a], phys_of[b]), gate.params, gate.matrix))
    routed = Circuit(topo.num_cells, out, circuit.num_params)
    return RoutedCircuit(routed, topo, initial, tuple(phys_of), native, swaps)


def route(circuit: Circuit, topo: GridTopology, seed: int = 0,
          restarts: int = 2) -> RoutedCircuit:
    """Best routed result over the deterministic layouts plus `restarts`
    random ones; ties go to the earlier candidate."""
    if circuit.num_qubits > topo.num_cells:
        raise ValueError(f"{circuit.num_qubits} qubits cannot map onto "
                         f"{topo.rows}x{topo.cols} cells")
    for gate in circuit.gates:
        if len(gate.targets) > 2:  # pragma: no cover - no such kinds today
            raise ValueError(f"cannot route {len(gate.targets)}-qubit gate {gate.kind}")
    layouts = [snake_layout(circuit, topo), block_layout(circuit, topo)]
    for r in range(restarts):
        layouts.append(random_layout(circuit, topo, rng_for(seed, "route", r)))
    best = None
    for layout in layouts:
        candidate = _route_with_layout(circuit, topo, layout)
        if best is None or candidate.cx_count < best.cx_count:
            best = candidate
    return best


def routed_equivalent(circuit: Circuit, routed: RoutedCircuit, params=None,
                      atol: float = 1e-9, seed: int = 0) -> bool:
    """Statevector check that routing preserved the unitary: a random product
    input pushed through both circuits agrees after undoing the final layout."""
    from .statevector import run_circuit_batch

    n = circuit.num_qubits
    cells = routed.topology.num_cells
    if cells > 14:
        raise ValueError(f"equivalence check limited to 14 cells, got {cells}")
    rng = rng_for(seed, "route-check", n)
    if params is None:
        params = rng.uniform(0.0, 2.0 * np.pi, circuit.num_params)
    angles = rng.uniform(0.0, np.pi, n)
    amps = np.ones(1, dtype=np.complex128)
    for q in range(n):
        amps = np.kron([np.cos(angles[q] / 2), np.sin(angles[q] / 2)], amps)
    out_logical = run_circuit_batch(circuit, params, amps[None, :])[0]

    phys_in = np.zeros(1 << cells, dtype=np.complex128)
    scatter = np.zeros(1 << n, dtype=np.int64)
    for j in range(1 << n):
        k = 0
        for q in range(n):
            if (j >> q) & 1:
                k |= 1 << routed.initial_layout[q]
        scatter[j] = k
    phys_in[scatter] = amps
    out_phys = run_circuit_batch(routed.circuit, params, phys_in[None, :])[0]

    expected = np.zeros_like(out_phys)
    for j in range(1 << n):
        k = 0
        for q in range(n):
            if (j >> q) & 1:
                k |= 1 << routed.final_layout[q]
        expected[k] = out_logical[j]
    return bool(np.max(np.abs(out_phys - expected)) <= atol)


# ---------------------------------------------------------------- table

_FAMILY_NAMES = {"linear": "efficient_su2_linear", "full": "efficient_su2_full"}


def _resolve(label, n: int) -> int:
    return n if label == "N" else int(label)


def count_table(n_values=(4, 16, 36), m_labels=("2", "4", "N"), l_labels=("2", "N"),
                families=("linear", "full"), seed: int = 0, restarts: int = 2) -> list:
    """Routed two-qubit counts for every (family, m, L, N) cell on the
    ceil(sqrt(N)) square grid; rows of plain dicts, CSV-ready."""
    rows = []
    for n in n_values:
        side = int(np.ceil(np.sqrt(n)))
        topo = GridTopology(side, side)
        for family in families:
            for m_label in m_labels:
                m = _resolve(m_label, n)
                if n % m != 0:
                    continue
                for l_label in l_labels:
                    depth = _resolve(l_label, n)
                    spec = SplitSpec(n, m, depth, block_family=_FAMILY_NAMES[family])
                    routed = route(build_cs(spec), topo, seed=seed, restarts=restarts)
                    rows.append({
                        "family": family, "m": m_label, "l": l_label, "n": n,
                        "rows": side, "cols": side,
                        "native_two_qubit": routed.native_two_qubit,
                        "swap_count": routed.swap_count,
                        "cx_count": routed.cx_count,
                    })
    return rows


def write_counts_csv(rows, path) -> None:
    buf = io.StringIO()
    buf.write(f"# schema={COUNTS_SCHEMA}\n")
    writer = csv.DictWriter(buf, fieldnames=COUNTS_COLUMNS)
    writer.writeheader()
    for row in rows:
        writer.writerow(row)
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(buf.getvalue())


def read_counts_csv(path) -> list:
    with open(path, encoding="utf-8") as fh:
        first = fh.readline().strip()
        if first != f"# schema={COUNTS_SCHEMA}":
            raise ValueError(f"unrecognized counts file header {first!r}")
        rows = []
        for row in csv.DictReader(fh):
            for key in ("n", "rows", "cols", "native_two_qubit", "swap_count", "cx_count"):
                row[key] = int(row[key])
            rows.append(row)
        return rows
