import numpy as np
import pytest

import splitqc.routing as rt
from splitqc.ansatz import SplitSpec, build_cs
from splitqc.circuits import Circuit, Gate


def su2(n, m, l, fam="efficient_su2_full"):
    return build_cs(SplitSpec(n, m, l, block_family=fam))


# ---------------------------------------------------------------- topology

def test_grid_edges_are_exactly_four_neighbor():
    topo = rt.GridTopology(2, 3)
    assert sorted(topo.edges) == [(0, 1), (0, 3), (1, 2), (1, 4), (2, 5), (3, 4), (4, 5)]
    assert topo.num_cells == 6
    # no diagonals
    assert (0, 4) not in topo.edges and (1, 3) not in topo.edges


def test_grid_distance_is_manhattan():
    topo = rt.GridTopology(3, 4)
    assert topo.dist[0, 0] == 0
    assert topo.dist[0, 3] == 3
    assert topo.dist[0, 11] == 2 + 3
    assert np.array_equal(topo.dist, topo.dist.T)


def test_snake_order_steps_are_adjacent():
    topo = rt.GridTopology(4, 5)
    order = topo.snake_order()
    assert sorted(order) == list(range(20))
    for a, b in zip(order, order[1:]):
        assert tuple(sorted((a, b))) in topo.edges


def test_grid_validation():
    with pytest.raises(ValueError, match="1x1"):
        rt.GridTopology(0, 4)
    with pytest.raises(ValueError, match="two cells"):
        rt.GridTopology(1, 1)


# ---------------------------------------------------------------- routing

def test_single_adjacent_cx_routes_natively():
    circ = Circuit(2, [Gate("CX", (0, 1))], 0)
    routed = rt.route(circ, rt.GridTopology(1, 2))
    assert routed.cx_count == 1
    assert routed.swap_count == 0
    assert rt.routed_equivalent(circ, routed)


def test_far_pair_needs_a_swap():
    circ = Circuit(4, [Gate("CX", (0, 3))], 0)
    routed = rt._route_with_layout(circ, rt.GridTopology(2, 2), [0, 1, 2, 3])
    assert routed.swap_count >= 1
    assert routed.cx_count == 1 + 3 * routed.swap_count
    assert rt.routed_equivalent(circ, routed)


@pytest.mark.parametrize("n,side", [(4, 2), (16, 4)])
def test_two_qubit_blocks_never_swap(n, side):
    routed = rt.route(su2(n, 2, 2, "efficient_su2_linear"), rt.GridTopology(side, side))
    assert routed.swap_count == 0
    assert routed.cx_count == routed.native_two_qubit == n


def test_linear_chain_full_width_close_to_native():
    circ = su2(4, 4, 2, "efficient_su2_linear")
    routed = rt.route(circ, rt.GridTopology(2, 2))
    assert routed.native_two_qubit == 6
    assert 6 <= routed.cx_count <= 8
    assert rt.routed_equivalent(circ, routed)


def test_routed_gates_stay_on_edges():
    circ = su2(9, 9, 3)
    topo = rt.GridTopology(3, 3)
    routed = rt.route(circ, topo, seed=1)
    assert routed.swap_count > 0
    for gate in routed.circuit.gates:
        if len(gate.targets) == 2:
            assert tuple(sorted(gate.targets)) in topo.edges


@pytest.mark.parametrize("n,rows,cols,m", [(4, 2, 2, 4), (6, 2, 3, 3), (8, 3, 3, 4)])
def test_unitary_equivalence_with_swaps(n, rows, cols, m):
    circ = su2(n, m, 2)
    routed = rt.route(circ, rt.GridTopology(rows, cols), seed=2)
    assert rt.routed_equivalent(circ, routed, seed=5)


def test_equivalence_with_idle_cells():
    # three logical qubits on four cells; swaps may pass through the idle one
    circ = su2(3, 3, 2)
    topo = rt.GridTopology(2, 2)
    for layout in ([0, 3, 1], [2, 0, 3]):
        routed = rt._route_with_layout(circ, topo, layout)
        assert rt.routed_equivalent(circ, routed, seed=3)


def test_parametrized_gates_survive_routing():
    circ = su2(4, 4, 1)
    routed = rt.route(circ, rt.GridTopology(2, 2))
    assert routed.circuit.num_params == circ.num_params
    kinds = {g.kind for g in routed.circuit.gates}
    assert "RY" in kinds and "RZ" in kinds


def test_route_is_deterministic():
    circ = su2(8, 4, 3)
    topo = rt.GridTopology(3, 3)
    a = rt.route(circ, topo, seed=4)
    b = rt.route(circ, topo, seed=4)
    assert a.cx_count == b.cx_count
    assert a.initial_layout == b.initial_layout
    assert [(g.kind, g.targets) for g in a.circuit.gates] == \
           [(g.kind, g.targets) for g in b.circuit.gates]


def test_route_rejects_oversized_circuit():
    with pytest.raises(ValueError, match="cells"):
        rt.route(Circuit(5, [], 0), rt.GridTopology(2, 2))


def test_split_advantage_on_counts():
    topo = rt.GridTopology(4, 4)
    small = rt.route(su2(16, 2, 2), topo).cx_count
    mid = rt.route(su2(16, 4, 2), topo).cx_count
    wide = rt.route(su2(16, 16, 2), topo).cx_count
    assert small < wide and mid < wide


# ---------------------------------------------------------------- layouts

def test_block_layout_tiles_four_qubit_components():
    circ = su2(16, 4, 1)
    topo = rt.GridTopology(4, 4)
    layout = rt.block_layout(circ, topo)
    for b in range(4):
        cells = layout[4 * b:4 * (b + 1)]
        rows = [c // 4 for c in cells]
        cols = [c % 4 for c in cells]
        assert max(rows) - min(rows) == 1 and max(cols) - min(cols) == 1
        for a, c in zip(cells, cells[1:]):
            assert tuple(sorted((a, c))) in topo.edges


def test_block_layout_falls_back_to_snake_segments():
    circ = su2(6, 3, 1)
    topo = rt.GridTopology(2, 3)
    layout = rt.block_layout(circ, topo)
    order = topo.snake_order()
    assert layout == order[:6]


# ---------------------------------------------------------------- table

def test_count_table_small():
    rows = rt.count_table(n_values=(4,), seed=0)
    assert len(rows) == 12
    by = {(r["family"], r["m"], r["l"]): r["cx_count"] for r in rows}
    # a 2-qubit block has a single pair, so linear and full coincide
    assert by[("linear", "2", "2")] == by[("full", "2", "2")] == 4
    assert by[("linear", "N", "2")] <= 8
    for r in rows:
        assert r["cx_count"] == r["native_two_qubit"] + 3 * r["swap_count"]
        assert r["n"] == 4 and r["rows"] == r["cols"] == 2


def test_counts_csv_round_trip(tmp_path):
    rows = rt.count_table(n_values=(4,), m_labels=("2",), l_labels=("2",), seed=0)
    path = tmp_path / "counts.csv"
    rt.write_counts_csv(rows, path)
    assert rt.read_counts_csv(path) == rows
    bad = tmp_path / "bad.csv"
    bad.write_text("# schema=splitqc.other.v9\nfamily\n")
    with pytest.raises(ValueError, match="header"):
        rt.read_counts_csv(bad)
