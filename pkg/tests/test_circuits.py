import numpy as np
import pytest

from splitqc import Circuit, Gate, Sym, cx, ry, swap, u3, unitary2
from splitqc.circuits import interaction_components


def test_gate_validation():
    with pytest.raises(ValueError):
        Gate("RY", (0, 1), (0.5,))
    with pytest.raises(ValueError):
        Gate("CX", (2, 2))
    with pytest.raises(ValueError):
        Gate("NOPE", (0,))
    with pytest.raises(ValueError):
        Gate("RY", (0,), (float("nan"),))
    with pytest.raises(ValueError):
        Gate("UNITARY2", (0, 1), matrix=np.ones((4, 4)))  # not unitary


def test_sym_validation():
    with pytest.raises(ValueError):
        Sym(-1)


def test_circuit_rejects_bad_targets_and_param_gaps():
    with pytest.raises(ValueError):
        Circuit(1, [cx(0, 1)])
    with pytest.raises(ValueError):
        # index 0 never used
        Circuit(2, [ry(Sym(1), 0)])
    with pytest.raises(ValueError):
        Circuit(2, [ry(Sym(0), 0)], num_params=0)


def test_param_occurrences():
    c = Circuit(2, [ry(Sym(0), 0), ry(Sym(0), 1), ry(Sym(1), 0)])
    assert c.num_params == 2
    assert c.param_occurrences(0) == [(0, 0), (1, 0)]
    assert c.param_occurrences(1) == [(2, 0)]


def test_gate_equality_and_immutability():
    assert ry(0.5, 1) == ry(0.5, 1)
    assert ry(0.5, 1) != ry(0.5, 0)
    assert cx(0, 1) != cx(1, 0)
    g = cx(0, 1)
    with pytest.raises(AttributeError):
        g.kind = "CZ"


def test_text_round_trip():
    mat = np.eye(4, dtype=complex)
    mat[2, 2] = np.exp(0.3j)
    mat[3, 3] = np.exp(-0.3j)
    c = Circuit(3, [
        ry(Sym(0), 0),
        u3(Sym(1), 0.25, Sym(2), 2),
        cx(0, 2),
        swap(1, 2),
        unitary2(mat, 2, 0),
    ])
    back = Circuit.from_text(c.to_text())
    assert back == c
    assert back.num_params == 3


def test_from_text_rejects_garbage():
    with pytest.raises(ValueError):
        Circuit.from_text("gates 3\n")
    with pytest.raises(ValueError):
        Circuit.from_text("qubits 2\nparams 0\nFOO 0\n")


def test_remap_qubits():
    c = Circuit(2, [ry(Sym(0), 0), cx(0, 1)])
    r = c.remap_qubits({0: 3, 1: 1}, num_qubits=4)
    assert r.gates[0].targets == (3,)
    assert r.gates[1].targets == (3, 1)


def test_interaction_components():
    c = Circuit(4, [cx(0, 1), cx(2, 3)])
    assert interaction_components(c) == [(0, 1), (2, 3)]
    c2 = Circuit(4, [cx(0, 1), cx(1, 2), cx(2, 3)])
    assert interaction_components(c2) == [(0, 1, 2, 3)]
    c3 = Circuit(3, [ry(0.1, 0)])
    assert interaction_components(c3) == [(0,), (1,), (2,)]
