import numpy as np
import pytest

from splitqc import (
    Observable,
    Sym,
    build_cs,
    build_efficient_su2,
    build_ladder_ry_cx,
    circuit_cost,
    cx,
    finite_difference_gradient,
    one_local_z,
    parameter_shift_gradient,
    rx,
    ry,
    rz,
    u3,
)
from splitqc.ansatz import SplitSpec
from splitqc.circuits import Circuit


def test_single_ry_cost_and_gradient():
    c = Circuit(1, [ry(Sym(0), 0)], 1)
    obs = Observable([(1.0, {0: "Z"})])
    for theta in (0.0, 0.3, np.pi / 2, 2.1):
        assert abs(circuit_cost(c, [theta], obs) - np.cos(theta)) < 1e-12
        g = parameter_shift_gradient(c, [theta], obs)
        assert abs(g[0] + np.sin(theta)) < 1e-12


def test_shared_parameter_accumulates():
    # same symbol on two qubits: cost = cos(t)^2 for Z0*Z1
    c = Circuit(2, [ry(Sym(0), 0), ry(Sym(0), 1)], 1)
    obs = Observable([(1.0, {0: "Z", 1: "Z"})])
    t = 0.7
    assert abs(circuit_cost(c, [t], obs) - np.cos(t) ** 2) < 1e-12
    g = parameter_shift_gradient(c, [t], obs)
    assert abs(g[0] + 2 * np.cos(t) * np.sin(t)) < 1e-12


@pytest.mark.parametrize("seed", range(6))
def test_parameter_shift_matches_finite_difference(seed):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(2, 5))
    kinds = [rx, ry, rz]
    gates = []
    next_p = 0
    for _ in range(12):
        if rng.random() < 0.3 and n >= 2:
            a, b = rng.choice(n, size=2, replace=False)
            gates.append(cx(int(a), int(b)))
        else:
            q = int(rng.integers(0, n))
            if rng.random() < 0.5 and next_p > 0:
                p = Sym(int(rng.integers(0, next_p)))
            else:
                p = Sym(next_p)
                next_p += 1
            gates.append(kinds[rng.integers(0, 3)](p, q))
    c = Circuit(n, gates, next_p)
    obs = Observable([(rng.normal(), {q: str(rng.choice(list("XYZ")))})
                      for q in range(n)])
    params = rng.uniform(0, 2 * np.pi, next_p)
    g_shift = parameter_shift_gradient(c, params, obs)
    g_fd = finite_difference_gradient(c, params, obs)
    assert np.max(np.abs(g_shift - g_fd)) < 1e-6


def test_gradient_of_standard_ansatze():
    rng = np.random.default_rng(17)
    for circ in (build_ladder_ry_cx(4, 3),
                 build_efficient_su2(3, 2, "full"),
                 build_cs(SplitSpec(6, 2, 2))):
        obs = one_local_z(circ.num_qubits)
        params = rng.uniform(0, 2 * np.pi, circ.num_params)
        g_shift = parameter_shift_gradient(circ, params, obs)
        g_fd = finite_difference_gradient(circ, params, obs)
        assert np.max(np.abs(g_shift - g_fd)) < 1e-6


def test_blockwise_gradient_independence():
    # parameters of block 1 never influence the Z average on block 0
    circ = build_cs(SplitSpec(4, 2, 2))
    obs = Observable([(0.5, {0: "Z"}), (0.5, {1: "Z"})])
    rng = np.random.default_rng(3)
    params = rng.uniform(0, 2 * np.pi, circ.num_params)
    g = parameter_shift_gradient(circ, params, obs)
    block1_params = [i for i in range(circ.num_params)
                     if any(t in (2, 3) for pos, _ in circ.param_occurrences(i)
                            for t in circ.gates[pos].targets)]
    assert block1_params
    assert np.max(np.abs(g[block1_params])) < 1e-12


def test_symbolic_u3_rejected_by_shift_rule():
    c = Circuit(1, [u3(Sym(0), Sym(1), Sym(2), 0)], 3)
    obs = Observable([(1.0, {0: "Z"})])
    with pytest.raises(ValueError):
        parameter_shift_gradient(c, [0.1, 0.2, 0.3], obs)
    # finite differences still work
    g = finite_difference_gradient(c, np.array([0.4, 0.2, 0.9]), obs)
    assert abs(g[0] + np.sin(0.4)) < 1e-6
    assert abs(g[1]) < 1e-6 and abs(g[2]) < 1e-6


def test_unused_parameter_gradient_is_zero_and_cost_batchable():
    c = build_ladder_ry_cx(3, 1)
    obs = Observable([(1.0, {2: "Z"})])
    params = np.array([0.5, 1.2, 0.0])
    g = parameter_shift_gradient(c, params, obs)
    fd = finite_difference_gradient(c, params, obs)
    assert np.allclose(g, fd, atol=1e-7)
