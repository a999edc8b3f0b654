"""Variational ground-state search on the transverse-field Ising chain.

The ansatz is the split circuit family built from SplitSpec; energies come
from exact statevector expectations by default, or from per-term sampled
estimates in shot mode. SPSA is the optimizer throughout.
"""
from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace

import numpy as np
import scipy.sparse.linalg

from ._seeding import rng_for, seed_sequence
from .ansatz import SplitSpec, build_cs, build_ecs
from .observables import Observable, tfih
from .optimizers import SpsaState, spsa_step
from .statevector import _PAULI_1Q, _apply_1q, expectation, expectation_shots, run_circuit

DENSE_MAX_QUBITS = 11
LANCZOS_MAX_QUBITS = 14


def build_tfih(num_qubits: int, j: float = 1.0, h: float = 1.0,
               periodic: bool = True) -> Observable:
    """-J sum Z_i Z_{i+1} - h sum X_i on a chain, wrapping around when
    periodic; the N=2 ring merges both bonds into one coefficient."""
    return tfih(num_qubits, coupling=j, field=h, periodic=periodic)


def _dense_matrix(obs: Observable, num_qubits: int) -> np.ndarray:
    dim = 1 << num_qubits
    out = np.zeros((dim, dim), dtype=np.complex128)
    eye = np.eye(2, dtype=np.complex128)
    for coeff, paulis in obs.terms:
        ops = {q: _PAULI_1Q[ax] for q, ax in paulis}
        term = np.ones((1, 1), dtype=np.complex128)
        for q in reversed(range(num_qubits)):
            term = np.kron(term, ops.get(q, eye))
        out += coeff * term
    return out


def _matvec(obs: Observable, num_qubits: int, vec: np.ndarray) -> np.ndarray:
    out = np.zeros_like(vec, dtype=np.complex128)
    for coeff, paulis in obs.terms:
        work = np.array(vec, dtype=np.complex128).reshape(1, -1)
        for q, ax in paulis:
            _apply_1q(work, q, _PAULI_1Q[ax])
        out += coeff * work[0]
    return out


def exact_ground_energy(obs: Observable, num_qubits: int) -> float:
    """Minimum eigenvalue: dense diagonalization up to 11 qubits, Lanczos on
    a matrix-free operator for 12-14, error above that."""
    if num_qubits < 1:
        raise ValueError("num_qubits must be >= 1")
    if num_qubits <= DENSE_MAX_QUBITS:
        return float(np.linalg.eigvalsh(_dense_matrix(obs, num_qubits))[0])
    if num_qubits <= LANCZOS_MAX_QUBITS:
        dim = 1 << num_qubits
        op = scipy.sparse.linalg.LinearOperator(
            (dim, dim), matvec=lambda v: _matvec(obs, num_qubits, v),
            dtype=np.complex128)
        vals = scipy.sparse.linalg.eigsh(op, k=1, which="SA",
                                         return_eigenvectors=False)
        return float(vals[0])
    raise ValueError(f"ground energy supported up to {LANCZOS_MAX_QUBITS} qubits, got {num_qubits}")


@dataclass(frozen=True)
class VqeRun:
    """One VQE configuration; depth splits as cs_layers + standard_layers
    inside `spec`."""

    spec: SplitSpec
    j: float = 1.0
    h: float = 1.0
    periodic: bool = True
    iterations: int = 2000
    shots: int | None = None  # None = analytic expectations
    seed: int = 0

    def __post_init__(self):
        if self.iterations < 1:
            raise ValueError(f"iterations must be >= 1, got {self.iterations}")
        if self.shots is not None and self.shots < 1:
            raise ValueError(f"shots must be >= 1 or None, got {self.shots}")


@dataclass(frozen=True)
class VqeResult:
    run: VqeRun
    params: np.ndarray
    trajectory: np.ndarray       # per-step (y+ + y-)/2 from the SPSA evals
    best_trajectory: np.ndarray  # running minimum of trajectory
    final_energy: float          # exact <H> at the final parameters
    ground_energy: float
    error: float                 # |final_energy - ground_energy|
    se_bound: float              # per-eval shot-noise SE upper bound, 0 analytic


def shot_noise_se_bound(obs: Observable, shots: int) -> float:
    """sqrt(sum_t c_t^2 / shots): each term's single-shot variance is at most
    c_t^2, and terms are sampled independently."""
    return float(np.sqrt(sum(c * c for c, _ in obs.terms) / shots))


def run_vqe(run: VqeRun) -> VqeResult:
    spec = run.spec
    circuit = build_ecs(spec) if spec.standard_layers > 0 else build_cs(spec)
    ham = build_tfih(spec.num_qubits, run.j, run.h, run.periodic)
    ground = exact_ground_energy(ham, spec.num_qubits)

    init_rng = rng_for(run.seed, "vqe-init", spec.num_qubits,
                       spec.cs_layers, spec.standard_layers)
    params = init_rng.uniform(0.0, 2.0 * np.pi, circuit.num_params)

    eval_index = [0]

    def energy(theta):
        state = run_circuit(circuit, theta)
        if run.shots is None:
            return expectation(state, ham)
        shot_seed = int(seed_sequence(run.seed, "vqe-shots", eval_index[0]).generate_state(1)[0])
        eval_index[0] += 1
        return expectation_shots(state, ham, run.shots, shot_seed)

    state = SpsaState.init(run.seed, iterations=run.iterations)
    trajectory = np.empty(run.iterations, dtype=np.float64)
    for k in range(run.iterations):
        state, params = spsa_step(state, params, energy)
        trajectory[k] = 0.5 * (state.last_evals[0] + state.last_evals[1])
    if not np.isfinite(trajectory).all():
        raise RuntimeError("SPSA diverged: non-finite energy in trajectory")

    final_energy = expectation(run_circuit(circuit, params), ham)
    se = 0.0 if run.shots is None else shot_noise_se_bound(ham, run.shots)
    return VqeResult(run, params, trajectory, np.minimum.accumulate(trajectory),
                     final_energy, ground, abs(final_energy - ground), se)


def run_vqe_batch(run: VqeRun, seeds, workers: int = 1) -> list:
    """The same configuration across several seeds, optionally in parallel;
    results come back in seed order either way."""
    runs = [replace(run, seed=int(s)) for s in seeds]
    if workers <= 1 or len(runs) <= 1:
        return [run_vqe(r) for r in runs]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(run_vqe, runs))


def mean_final_error(results) -> float:
    return float(np.mean([r.error for r in results]))
