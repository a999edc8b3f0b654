"""Dense statevector simulation.

Amplitude index bit q is qubit q (qubit 0 least significant). Gates are
applied in place with strided views over the amplitude array; no full-register
matrix is ever built. All kernels accept arrays whose last axis is the
register dimension, so a leading batch axis comes for free; the batched entry
points are what keep the classifier and dataset generation fast.
"""
from __future__ import annotations

from functools import lru_cache

import numpy as np

from ._seeding import rng_for
from .circuits import Circuit, Gate, Sym
from .observables import Observable

_INV_SQRT2 = 1.0 / np.sqrt(2.0)
_H = np.array([[_INV_SQRT2, _INV_SQRT2], [_INV_SQRT2, -_INV_SQRT2]], dtype=np.complex128)
_X = np.array([[0, 1], [1, 0]], dtype=np.complex128)
# H @ S^dagger maps the Y eigenbasis onto the Z basis
_HSDG = np.array([[_INV_SQRT2, -1j * _INV_SQRT2], [_INV_SQRT2, 1j * _INV_SQRT2]], dtype=np.complex128)
_PAULI_1Q = {
    "X": _X,
    "Y": np.array([[0, -1j], [1j, 0]], dtype=np.complex128),
    "Z": np.array([[1, 0], [0, -1]], dtype=np.complex128),
}


def mat_rx(theta):
    theta = np.asarray(theta, dtype=np.float64)
    c, s = np.cos(theta / 2), np.sin(theta / 2)
    out = np.empty(theta.shape + (2, 2), dtype=np.complex128)
    out[..., 0, 0] = c
    out[..., 0, 1] = -1j * s
    out[..., 1, 0] = -1j * s
    out[..., 1, 1] = c
    return out


def mat_ry(theta):
    theta = np.asarray(theta, dtype=np.float64)
    c, s = np.cos(theta / 2), np.sin(theta / 2)
    out = np.empty(theta.shape + (2, 2), dtype=np.complex128)
    out[..., 0, 0] = c
    out[..., 0, 1] = -s
    out[..., 1, 0] = s
    out[..., 1, 1] = c
    return out


def mat_rz(theta):
    theta = np.asarray(theta, dtype=np.float64)
    phase = np.exp(-0.5j * theta)
    out = np.zeros(theta.shape + (2, 2), dtype=np.complex128)
    out[..., 0, 0] = phase
    out[..., 1, 1] = np.conj(phase)
    return out


def mat_u3(theta, phi, lam):
    theta = np.asarray(theta, dtype=np.float64)
    phi = np.asarray(phi, dtype=np.float64)
    lam = np.asarray(lam, dtype=np.float64)
    c, s = np.cos(theta / 2), np.sin(theta / 2)
    out = np.empty(np.broadcast(theta, phi, lam).shape + (2, 2), dtype=np.complex128)
    out[..., 0, 0] = c
    out[..., 0, 1] = -np.exp(1j * lam) * s
    out[..., 1, 0] = np.exp(1j * phi) * s
    out[..., 1, 1] = np.exp(1j * (phi + lam)) * c
    return out


def gate_matrix(kind: str, angles=()):
    """Dense matrix of a bound gate (2x2, or 4x4 for two-qubit kinds)."""
    if kind == "RX":
        return mat_rx(angles[0])
    if kind == "RY":
        return mat_ry(angles[0])
    if kind == "RZ":
        return mat_rz(angles[0])
    if kind == "U3":
        return mat_u3(*angles)
    if kind == "H":
        return _H.copy()
    if kind == "X":
        return _X.copy()
    if kind == "CX":
        m = np.eye(4, dtype=np.complex128)
        m[[2, 3]] = m[[3, 2]]
        return m
    if kind == "CZ":
        m = np.eye(4, dtype=np.complex128)
        m[3, 3] = -1
        return m
    if kind == "SWAP":
        m = np.eye(4, dtype=np.complex128)
        m[[1, 2]] = m[[2, 1]]
        return m
    raise ValueError(f"no fixed matrix for gate kind {kind!r}")


# ---------------------------------------------------------------- kernels

def _apply_1q(amps, q: int, mat):
    lo = 1 << q
    v = amps.reshape(-1, 2, lo)
    v0, v1 = v[:, 0, :], v[:, 1, :]
    m00, m01, m10, m11 = mat[0, 0], mat[0, 1], mat[1, 0], mat[1, 1]
    if m01 == 0 and m10 == 0:
        v0 *= m00
        v1 *= m11
        return
    t0 = m00 * v0 + m01 * v1
    v1 *= m11
    v1 += m10 * v0
    v0[:] = t0


def _apply_1q_per_sample(amps, q: int, mats):
    """amps (B, dim), mats (B, 2, 2): a different 1q matrix per batch entry."""
    b = amps.shape[0]
    lo = 1 << q
    v = amps.reshape(b, -1, 2, lo)
    v0, v1 = v[:, :, 0, :], v[:, :, 1, :]
    m00 = mats[:, 0, 0][:, None, None]
    m01 = mats[:, 0, 1][:, None, None]
    m10 = mats[:, 1, 0][:, None, None]
    m11 = mats[:, 1, 1][:, None, None]
    t0 = m00 * v0 + m01 * v1
    v1 *= m11
    v1 += m10 * v0
    v0[:] = t0


def _views_2q(amps, a: int, b: int):
    """5-axis view exposing bits a and b; returns (view, axis_of_a, axis_of_b)."""
    hi, lo = (a, b) if a > b else (b, a)
    mid = 1 << (hi - lo - 1)
    v = amps.reshape(-1, 2, mid, 2, 1 << lo)
    if a == hi:
        return v, 1, 3
    return v, 3, 1


def _apply_cx(amps, control: int, target: int):
    v, ax_c, ax_t = _views_2q(amps, control, target)
    idx = [slice(None)] * 5
    idx[ax_c] = 1
    sub = v[tuple(idx)]  # control = 1 subspace, 4 axes, target bit at ax_t-adjusted pos
    t_ax = ax_t if ax_t < ax_c else ax_t - 1
    s0 = [slice(None)] * 4
    s1 = [slice(None)] * 4
    s0[t_ax] = 0
    s1[t_ax] = 1
    tmp = sub[tuple(s0)].copy()
    sub[tuple(s0)] = sub[tuple(s1)]
    sub[tuple(s1)] = tmp


def _apply_cz(amps, a: int, b: int):
    v, _, _ = _views_2q(amps, a, b)
    v[:, 1, :, 1, :] *= -1.0


def _apply_swap(amps, a: int, b: int):
    v, _, _ = _views_2q(amps, a, b)
    tmp = v[:, 0, :, 1, :].copy()
    v[:, 0, :, 1, :] = v[:, 1, :, 0, :]
    v[:, 1, :, 0, :] = tmp


def _apply_2q(amps, a: int, b: int, mat):
    """Generic 4x4; matrix index is 2*bit_a + bit_b."""
    v, ax_a, ax_b = _views_2q(amps, a, b)
    slices = []
    for ba in (0, 1):
        for bb in (0, 1):
            idx = [slice(None)] * 5
            idx[ax_a] = ba
            idx[ax_b] = bb
            slices.append(tuple(idx))
    olds = [v[s].copy() for s in slices]
    for i, s in enumerate(slices):
        acc = mat[i, 0] * olds[0]
        for j in (1, 2, 3):
            acc += mat[i, j] * olds[j]
        v[s] = acc


def _apply_bound_gate(amps, kind: str, targets, angles, matrix):
    if kind in ("RX", "RY", "RZ", "U3"):
        _apply_1q(amps, targets[0], gate_matrix(kind, angles))
    elif kind == "H":
        _apply_1q(amps, targets[0], _H)
    elif kind == "X":
        _apply_1q(amps, targets[0], _X)
    elif kind == "CX":
        _apply_cx(amps, targets[0], targets[1])
    elif kind == "CZ":
        _apply_cz(amps, targets[0], targets[1])
    elif kind == "SWAP":
        _apply_swap(amps, targets[0], targets[1])
    elif kind == "UNITARY1":
        _apply_1q(amps, targets[0], matrix)
    elif kind == "UNITARY2":
        _apply_2q(amps, targets[0], targets[1], matrix)
    else:  # pragma: no cover - Gate constructor rejects unknown kinds
        raise ValueError(f"unknown gate kind {kind!r}")


def _run_into(amps, circuit: Circuit, params):
    """Apply every gate of `circuit` in place to `amps` (last axis = 2^n)."""
    for gate in circuit.gates:
        angles = gate.bound_angles(params) if gate.params else ()
        _apply_bound_gate(amps, gate.kind, gate.targets, angles, gate.matrix)


# ---------------------------------------------------------------- state object

class Statevector:
    """Normalized complex amplitude vector over `num_qubits` qubits."""

    __slots__ = ("num_qubits", "amps")

    def __init__(self, amps, copy: bool = True, check: bool = True):
        arr = np.array(amps, dtype=np.complex128, order="C", copy=copy)
        if arr.ndim != 1:
            raise ValueError(f"amplitudes must be 1-D, got shape {arr.shape}")
        n = int(arr.shape[0]).bit_length() - 1
        if arr.shape[0] != (1 << n) or arr.shape[0] < 2:
            raise ValueError(f"amplitude length {arr.shape[0]} is not a power of two >= 2")
        if check:
            norm = np.linalg.norm(arr)
            if abs(norm - 1.0) > 1e-6:
                raise ValueError(f"state is not normalized (norm {norm:.8f})")
        object.__setattr__(self, "num_qubits", n)
        object.__setattr__(self, "amps", arr)

    def __setattr__(self, name, value):
        raise AttributeError("Statevector fields are read-only; use copy()")

    @classmethod
    def zero(cls, num_qubits: int) -> "Statevector":
        if num_qubits < 1:
            raise ValueError("num_qubits must be >= 1")
        amps = np.zeros(1 << num_qubits, dtype=np.complex128)
        amps[0] = 1.0
        return cls(amps, copy=False, check=False)

    @classmethod
    def from_product(cls, factors) -> "Statevector":
        """Tensor product of single-qubit states, factors[0] on qubit 0."""
        out = np.array([1.0], dtype=np.complex128)
        for f in reversed(list(factors)):
            f = np.asarray(f, dtype=np.complex128)
            if f.shape != (2,):
                raise ValueError(f"each factor must have shape (2,), got {f.shape}")
            out = np.kron(out, f)
        return cls(out, copy=False)

    def copy(self) -> "Statevector":
        return Statevector(self.amps, copy=True, check=False)

    def norm(self) -> float:
        return float(np.linalg.norm(self.amps))

    def probabilities(self) -> np.ndarray:
        return np.abs(self.amps) ** 2

    def __repr__(self):
        return f"Statevector(num_qubits={self.num_qubits})"


def apply_gate(state: Statevector, gate: Gate) -> Statevector:
    """Return gate|state>; the input state is left untouched."""
    if gate.is_symbolic:
        raise ValueError(f"cannot apply gate with unbound symbolic parameters: {gate!r}")
    for t in gate.targets:
        if t >= state.num_qubits:
            raise ValueError(f"gate targets qubit {t} on a {state.num_qubits}-qubit state")
    amps = state.amps.copy()
    _apply_bound_gate(amps, gate.kind, gate.targets, gate.params, gate.matrix)
    return Statevector(amps, copy=False, check=False)


def run_circuit(circuit: Circuit, params=None, initial: Statevector | None = None) -> Statevector:
    """U(theta)|initial>, with |0...0> as the default input."""
    if params is None:
        params = ()
    params = np.asarray(params, dtype=np.float64)
    if params.shape != (circuit.num_params,):
        raise ValueError(f"expected {circuit.num_params} parameters, got shape {params.shape}")
    if initial is None:
        state = Statevector.zero(circuit.num_qubits)
        amps = state.amps
    else:
        if initial.num_qubits != circuit.num_qubits:
            raise ValueError(f"initial state has {initial.num_qubits} qubits, circuit {circuit.num_qubits}")
        amps = initial.amps.copy()
    _run_into(amps, circuit, params)
    return Statevector(amps, copy=False, check=False)


def run_circuit_batch(circuit: Circuit, params, initial_amps=None) -> np.ndarray:
    """Vectorized run over a batch.

    params: (P,) shared across the batch, or (B, P) per-sample (only
    single-qubit parametrized gates support per-sample binding).
    initial_amps: (B, 2^n) array or None for |0...0>.
    Returns the final (B, 2^n) amplitude array.
    """
    params = np.asarray(params, dtype=np.float64)
    if params.ndim not in (1, 2):
        raise ValueError(f"params must be (P,) or (B, P), got shape {params.shape}")
    per_sample = params.ndim == 2
    if params.shape[-1] != circuit.num_params:
        raise ValueError(f"expected {circuit.num_params} parameters per sample, got shape {params.shape}")
    if initial_amps is None:
        if not per_sample:
            raise ValueError("need per-sample params or initial_amps to fix the batch size")
        b = params.shape[0]
        amps = np.zeros((b, 1 << circuit.num_qubits), dtype=np.complex128)
        amps[:, 0] = 1.0
    else:
        amps = np.array(initial_amps, dtype=np.complex128, order="C", copy=True)
        if amps.ndim != 2 or amps.shape[1] != 1 << circuit.num_qubits:
            raise ValueError(f"initial_amps must be (B, {1 << circuit.num_qubits}), got {amps.shape}")
        if per_sample and params.shape[0] != amps.shape[0]:
            raise ValueError("params batch and initial_amps batch differ")
    for gate in circuit.gates:
        if per_sample and gate.is_symbolic:
            angles = [params[:, p.index] if isinstance(p, Sym) else np.full(amps.shape[0], p)
                      for p in gate.params]
            if gate.kind not in ("RX", "RY", "RZ", "U3"):  # pragma: no cover
                raise ValueError(f"per-sample binding not supported for {gate.kind}")
            if gate.kind == "U3":
                mats = mat_u3(*angles)
            else:
                mats = {"RX": mat_rx, "RY": mat_ry, "RZ": mat_rz}[gate.kind](angles[0])
            _apply_1q_per_sample(amps, gate.targets[0], mats)
        else:
            bound = gate.bound_angles(params if not per_sample else params[0]) if gate.params else ()
            _apply_bound_gate(amps, gate.kind, gate.targets, bound, gate.matrix)
    return amps


# ---------------------------------------------------------------- expectations

@lru_cache(maxsize=512)
def _z_signs(num_qubits: int, mask: int) -> np.ndarray:
    idx = np.arange(1 << num_qubits, dtype=np.uint64)
    parity = np.bitwise_count(idx & np.uint64(mask)) & np.uint64(1)
    signs = 1.0 - 2.0 * parity.astype(np.float64)
    signs.flags.writeable = False
    return signs


def _check_obs(num_qubits: int, obs: Observable):
    if obs.max_qubit() >= num_qubits:
        raise ValueError(f"observable touches qubit {obs.max_qubit()}, register has {num_qubits}")


def _expectation_amps(amps2d: np.ndarray, num_qubits: int, obs: Observable) -> np.ndarray:
    out = np.zeros(amps2d.shape[0], dtype=np.float64)
    probs = None
    for coeff, paulis in obs.terms:
        if not paulis:
            out += coeff
            continue
        if all(ax == "Z" for _, ax in paulis):
            if probs is None:
                probs = np.abs(amps2d) ** 2
            mask = 0
            for q, _ in paulis:
                mask |= 1 << q
            out += coeff * (probs @ _z_signs(num_qubits, mask))
        else:
            work = amps2d.copy()
            for q, ax in paulis:
                _apply_1q(work, q, _PAULI_1Q[ax])
            out += coeff * np.real(np.sum(np.conj(amps2d) * work, axis=-1))
    return out


def expectation(state: Statevector, obs: Observable) -> float:
    """Tr[O |psi><psi|], exact."""
    _check_obs(state.num_qubits, obs)
    return float(_expectation_amps(state.amps[None, :], state.num_qubits, obs)[0])


def expectation_batch(amps: np.ndarray, num_qubits: int, obs: Observable) -> np.ndarray:
    """Exact expectations for a (B, 2^n) amplitude batch."""
    amps = np.ascontiguousarray(amps, dtype=np.complex128)
    if amps.ndim != 2 or amps.shape[1] != 1 << num_qubits:
        raise ValueError(f"expected shape (B, {1 << num_qubits}), got {amps.shape}")
    _check_obs(num_qubits, obs)
    return _expectation_amps(amps, num_qubits, obs)


def expectation_shots(state: Statevector, obs: Observable, shots: int, seed: int) -> float:
    """Sampled estimator: each Pauli term measured independently with `shots` draws.

    A term is rotated into the Z basis (H for X factors, H S^dagger for Y),
    bitstrings are drawn from the rotated probabilities, and the +/-1 parities
    are averaged. Deterministic for a fixed seed.
    """
    shots = int(shots)
    if shots < 1:
        raise ValueError(f"shots must be >= 1, got {shots}")
    _check_obs(state.num_qubits, obs)
    rng = rng_for(seed, "expectation_shots")
    n = state.num_qubits
    total = 0.0
    for coeff, paulis in obs.terms:
        if not paulis:
            total += coeff
            continue
        work = state.amps.copy()
        mask = 0
        for q, ax in paulis:
            mask |= 1 << q
            if ax == "X":
                _apply_1q(work, q, _H)
            elif ax == "Y":
                _apply_1q(work, q, _HSDG)
        probs = np.abs(work) ** 2
        probs /= probs.sum()
        counts = rng.multinomial(shots, probs)
        total += coeff * float(counts @ _z_signs(n, mask)) / shots
    return total


# ---------------------------------------------------------------- entanglement

def _subset_axes(num_qubits: int, subset) -> tuple:
    """Transpose order putting the subset bits first, significance preserved."""
    subset = sorted(subset)
    rest = [q for q in range(num_qubits) if q not in subset]
    row_axes = [num_qubits - 1 - q for q in reversed(subset)]
    col_axes = [num_qubits - 1 - q for q in reversed(rest)]
    return tuple(row_axes + col_axes)


def _clean_subset(num_qubits: int, subset) -> tuple:
    cleaned = sorted(set(int(q) for q in subset))
    if cleaned and (cleaned[0] < 0 or cleaned[-1] >= num_qubits):
        raise ValueError(f"subset {cleaned} invalid for {num_qubits} qubits")
    return tuple(cleaned)


def reduced_density_matrix(state: Statevector, subset) -> np.ndarray:
    """rho_alpha with the subset qubits forming their own little register
    (smallest subset qubit = least significant bit)."""
    n = state.num_qubits
    subset = _clean_subset(n, subset)
    k = len(subset)
    m = state.amps.reshape((2,) * n).transpose(_subset_axes(n, subset))
    m = np.ascontiguousarray(m).reshape(1 << k, 1 << (n - k))
    return m @ m.conj().T


def subsystem_purity(state: Statevector, subset) -> float:
    """Tr[rho_alpha^2]; the empty subset returns 1 by convention."""
    n = state.num_qubits
    subset = _clean_subset(n, subset)
    if not subset:
        return 1.0
    if len(subset) > n // 2:
        # Tr[rho_alpha^2] = Tr[rho_complement^2] for a pure global state
        subset = tuple(q for q in range(n) if q not in subset)
        if not subset:
            return 1.0
    rho = reduced_density_matrix(state, subset)
    return float(np.sum(np.abs(rho) ** 2))


CE_MAX_QUBITS = 12


def _purity_batch(amps: np.ndarray, num_qubits: int, subset) -> np.ndarray:
    b = amps.shape[0]
    k = len(subset)
    perm = (0,) + tuple(1 + ax for ax in _subset_axes(num_qubits, subset))
    m = amps.reshape((b,) + (2,) * num_qubits).transpose(perm)
    m = np.ascontiguousarray(m).reshape(b, 1 << k, 1 << (num_qubits - k))
    g = np.einsum("bij,bkj->bik", m, m.conj())
    return np.einsum("bik,bik->b", g, g.conj()).real


def concentrable_entanglement_batch(amps: np.ndarray, num_qubits: int) -> np.ndarray:
    """CE for every row of a (B, 2^n) batch of normalized amplitude vectors."""
    n = num_qubits
    if n > CE_MAX_QUBITS:
        raise ValueError(f"concentrable entanglement limited to {CE_MAX_QUBITS} qubits, got {n}")
    amps = np.ascontiguousarray(amps, dtype=np.complex128)
    if amps.ndim != 2 or amps.shape[1] != 1 << n:
        raise ValueError(f"expected shape (B, {1 << n}), got {amps.shape}")
    total = np.zeros(amps.shape[0], dtype=np.float64)
    for mask in range(1 << n):
        size = mask.bit_count()
        if 2 * size > n:
            continue  # covered by its complement below
        comp = ((1 << n) - 1) ^ mask
        if 2 * size == n and mask > comp:
            continue
        subset = tuple(q for q in range(n) if (mask >> q) & 1)
        if size == 0:
            total += 2.0  # empty set and full register both have purity 1
        else:
            total += 2.0 * _purity_batch(amps, n, subset)
    return 1.0 - total / (1 << n)


def concentrable_entanglement(state: Statevector) -> float:
    """1 - 2^-N sum of subsystem purities over the full power set (Q includes
    the empty and full subsets)."""
    return float(concentrable_entanglement_batch(state.amps[None, :], state.num_qubits)[0])
