"""Independent dense oracles used to cross-check the strided kernels.

Everything here is built from explicit matrices and bit arithmetic, on
purpose sharing no code with the package's simulator.
"""
import numpy as np
from scipy.linalg import expm

SX = np.array([[0, 1], [1, 0]], dtype=complex)
SY = np.array([[0, -1j], [1j, 0]], dtype=complex)
SZ = np.array([[1, 0], [0, -1]], dtype=complex)
SI = np.eye(2, dtype=complex)


def oracle_gate_matrix(kind, angles=()):
    if kind == "RX":
        return expm(-0.5j * angles[0] * SX)
    if kind == "RY":
        return expm(-0.5j * angles[0] * SY)
    if kind == "RZ":
        return expm(-0.5j * angles[0] * SZ)
    if kind == "U3":
        t, p, l = angles
        return np.array([
            [np.cos(t / 2), -np.exp(1j * l) * np.sin(t / 2)],
            [np.exp(1j * p) * np.sin(t / 2), np.exp(1j * (p + l)) * np.cos(t / 2)],
        ])
    if kind == "H":
        return np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2)
    if kind == "X":
        return SX.copy()
    if kind == "CX":
        m = np.zeros((4, 4), dtype=complex)
        for a in range(2):
            for b in range(2):
                m[(a << 1) | (b ^ a), (a << 1) | b] = 1
        return m
    if kind == "CZ":
        return np.diag([1, 1, 1, -1]).astype(complex)
    if kind == "SWAP":
        m = np.zeros((4, 4), dtype=complex)
        for a in range(2):
            for b in range(2):
                m[(b << 1) | a, (a << 1) | b] = 1
        return m
    raise ValueError(kind)


def embed(num_qubits, targets, mat):
    """Full-register matrix for a small gate; targets[0] is the most
    significant bit of the gate matrix index, qubit 0 the register LSB."""
    dim = 1 << num_qubits
    k = len(targets)
    out = np.zeros((dim, dim), dtype=complex)
    clear = ~sum(1 << t for t in targets) & (dim - 1)
    for i in range(dim):
        sub = 0
        for t in targets:
            sub = (sub << 1) | ((i >> t) & 1)
        base = i & clear
        for sub2 in range(1 << k):
            j = base
            for pos, t in enumerate(targets):
                bit = (sub2 >> (k - 1 - pos)) & 1
                j |= bit << t
            out[j, i] += mat[sub2, sub]
    return out


def circuit_unitary(circuit, params=()):
    """Dense unitary of the whole circuit, built gate by gate."""
    dim = 1 << circuit.num_qubits
    u = np.eye(dim, dtype=complex)
    for gate in circuit.gates:
        if gate.matrix is not None:
            small = np.asarray(gate.matrix)
        else:
            small = oracle_gate_matrix(gate.kind, gate.bound_angles(params))
        u = embed(circuit.num_qubits, gate.targets, small) @ u
    return u


def obs_matrix(obs, num_qubits):
    dim = 1 << num_qubits
    out = np.zeros((dim, dim), dtype=complex)
    lookup = {"X": SX, "Y": SY, "Z": SZ}
    for coeff, paulis in obs.terms:
        axes = dict(paulis)
        term = np.array([[1.0 + 0j]])
        for q in range(num_qubits - 1, -1, -1):
            term = np.kron(term, lookup[axes[q]] if q in axes else SI)
        out += coeff * term
    return out


def oracle_expectation(psi, obs, num_qubits):
    return float(np.real(psi.conj() @ obs_matrix(obs, num_qubits) @ psi))


def partial_trace(psi, num_qubits, keep):
    """Reduced density matrix over `keep` (ascending; smallest qubit = LSB
    of the reduced index), by explicit bit loops."""
    keep = sorted(keep)
    kd = 1 << len(keep)
    rest = [q for q in range(num_qubits) if q not in keep]
    rho = np.zeros((kd, kd), dtype=complex)
    for a in range(kd):
        for b in range(kd):
            total = 0.0 + 0j
            for r in range(1 << len(rest)):
                ia = ib = 0
                for pos, q in enumerate(keep):
                    ia |= ((a >> pos) & 1) << q
                    ib |= ((b >> pos) & 1) << q
                for pos, q in enumerate(rest):
                    bit = (r >> pos) & 1
                    ia |= bit << q
                    ib |= bit << q
                total += psi[ia] * np.conj(psi[ib])
            rho[a, b] = total
    return rho


def oracle_ce(psi, num_qubits):
    """Concentrable entanglement by brute-force power-set enumeration."""
    total = 0.0
    for mask in range(1 << num_qubits):
        keep = [q for q in range(num_qubits) if (mask >> q) & 1]
        if not keep:
            total += 1.0
            continue
        rho = partial_trace(psi, num_qubits, keep)
        total += float(np.real(np.trace(rho @ rho)))
    return 1.0 - total / (1 << num_qubits)


def random_state(num_qubits, rng):
    amps = rng.normal(size=1 << num_qubits) + 1j * rng.normal(size=1 << num_qubits)
    return amps / np.linalg.norm(amps)


def random_product_state(num_qubits, rng):
    factors = []
    full = np.array([1.0 + 0j])
    for _ in range(num_qubits):
        f = rng.normal(size=2) + 1j * rng.normal(size=2)
        f = f / np.linalg.norm(f)
        factors.append(f)
        full = np.kron(f, full)
    return full, factors
