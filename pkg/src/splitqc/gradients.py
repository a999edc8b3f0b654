"""Cost evaluation and gradients of circuit expectation values."""
from __future__ import annotations

import numpy as np

from .circuits import PAULI_ROTATIONS, Circuit, Sym
from .observables import Observable
from .statevector import Statevector, _apply_bound_gate, _expectation_amps, run_circuit


def circuit_cost(circuit: Circuit, params, obs: Observable,
                 initial: Statevector | None = None) -> float:
    """C(theta) = <psi(theta)| O |psi(theta)>."""
    state = run_circuit(circuit, params, initial)
    from .statevector import expectation

    return expectation(state, obs)


def _bound_gate_list(circuit: Circuit, params):
    return [[g.kind, g.targets, list(g.bound_angles(params)), g.matrix] for g in circuit.gates]


def _cost_of_bound(num_qubits: int, bound_gates, obs: Observable,
                   initial: Statevector | None) -> float:
    if initial is None:
        amps = np.zeros(1 << num_qubits, dtype=np.complex128)
        amps[0] = 1.0
    else:
        amps = initial.amps.copy()
    for kind, targets, angles, matrix in bound_gates:
        _apply_bound_gate(amps, kind, targets, angles, matrix)
    return float(_expectation_amps(amps[None, :], num_qubits, obs)[0])


def parameter_shift_gradient(circuit: Circuit, params, obs: Observable,
                             initial: Statevector | None = None) -> np.ndarray:
    """Exact gradient via the +/- pi/2 shift rule.

    Valid only when every symbolic parameter sits in a Pauli rotation
    (RX/RY/RZ, generator eigenvalues +/-1/2); anything else is rejected
    rather than silently approximated. A parameter reused by several gates
    accumulates one shift-rule term per occurrence.
    """
    params = np.asarray(params, dtype=np.float64)
    if params.shape != (circuit.num_params,):
        raise ValueError(f"expected {circuit.num_params} parameters, got shape {params.shape}")
    for gate in circuit.gates:
        if gate.is_symbolic and gate.kind not in PAULI_ROTATIONS:
            raise ValueError(
                f"parameter-shift rule needs Pauli rotations, found symbolic {gate.kind}")
    bound = _bound_gate_list(circuit, params)
    grad = np.zeros(circuit.num_params)
    for j in range(circuit.num_params):
        total = 0.0
        for pos, slot in circuit.param_occurrences(j):
            original = bound[pos][2][slot]
            bound[pos][2][slot] = original + np.pi / 2
            plus = _cost_of_bound(circuit.num_qubits, bound, obs, initial)
            bound[pos][2][slot] = original - np.pi / 2
            minus = _cost_of_bound(circuit.num_qubits, bound, obs, initial)
            bound[pos][2][slot] = original
            total += 0.5 * (plus - minus)
        grad[j] = total
    return grad


def finite_difference_gradient(circuit: Circuit, params, obs: Observable,
                               initial: Statevector | None = None,
                               step: float = 1e-5) -> np.ndarray:
    """Central differences; the independent oracle for parameter_shift_gradient."""
    params = np.asarray(params, dtype=np.float64)
    if params.shape != (circuit.num_params,):
        raise ValueError(f"expected {circuit.num_params} parameters, got shape {params.shape}")
    grad = np.empty(circuit.num_params)
    work = params.copy()
    for j in range(circuit.num_params):
        work[j] = params[j] + step
        plus = circuit_cost(circuit, work, obs, initial)
        work[j] = params[j] - step
        minus = circuit_cost(circuit, work, obs, initial)
        work[j] = params[j]
        grad[j] = (plus - minus) / (2.0 * step)
    return grad
