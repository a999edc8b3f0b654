"""Hermitian observables as weighted sums of Pauli strings."""
from __future__ import annotations

import numpy as np

_PAULI = {
    "I": np.eye(2, dtype=np.complex128),
    "X": np.array([[0, 1], [1, 0]], dtype=np.complex128),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=np.complex128),
    "Z": np.array([[1, 0], [0, -1]], dtype=np.complex128),
}


class Observable:
    """Sum of real-weighted Pauli strings; identity factors are implicit.

    Each term is (coefficient, pauli map qubit -> 'X'|'Y'|'Z'). Terms with
    identical strings are merged at construction; exact zero coefficients are
    dropped unless the whole observable would vanish.
    """

    __slots__ = ("terms",)

    def __init__(self, terms):
        merged: dict[tuple, float] = {}
        for coeff, paulis in terms:
            coeff = float(coeff)
            items = []
            for q, ax in dict(paulis).items():
                q = int(q)
                if q < 0:
                    raise ValueError(f"negative qubit index {q}")
                if ax not in ("X", "Y", "Z"):
                    raise ValueError(f"pauli axis must be X, Y or Z, got {ax!r}")
                items.append((q, ax))
            key = tuple(sorted(items))
            if len(dict(key)) != len(key):
                raise ValueError(f"duplicate qubit in pauli string {paulis!r}")
            merged[key] = merged.get(key, 0.0) + coeff
        cleaned = [(c, k) for k, c in merged.items() if c != 0.0]
        if not cleaned and merged:
            cleaned = [(0.0, next(iter(merged)))]
        object.__setattr__(self, "terms", tuple(cleaned))

    def __setattr__(self, name, value):
        raise AttributeError("Observable is immutable")

    def __len__(self):
        return len(self.terms)

    def __eq__(self, other):
        if not isinstance(other, Observable):
            return NotImplemented
        return sorted(self.terms, key=lambda t: t[1]) == sorted(other.terms, key=lambda t: t[1])

    def __repr__(self):
        bits = []
        for coeff, paulis in self.terms[:6]:
            label = "*".join(f"{ax}{q}" for q, ax in paulis) or "I"
            bits.append(f"{coeff:+.4g} {label}")
        if len(self.terms) > 6:
            bits.append("...")
        return f"Observable({' '.join(bits)})"

    def scaled(self, factor: float) -> "Observable":
        return Observable([(factor * c, dict(p)) for c, p in self.terms])

    def plus(self, other: "Observable") -> "Observable":
        return Observable([(c, dict(p)) for c, p in self.terms]
                          + [(c, dict(p)) for c, p in other.terms])

    def max_qubit(self) -> int:
        """Largest qubit index mentioned; -1 for a pure identity observable."""
        qs = [q for _, paulis in self.terms for q, _ in paulis]
        return max(qs) if qs else -1

    def abs_coeff_sum(self) -> float:
        """Upper bound on the spectral radius."""
        return float(sum(abs(c) for c, _ in self.terms))

    def restricted(self, qubits) -> "Observable":
        """Terms supported entirely on `qubits`, reindexed to that subregister.

        Qubit q maps to its position in sorted(qubits). Terms that touch any
        other qubit must not exist (error), except pure identity terms which
        pass through; callers use this to project block-local observables.
        """
        order = {q: i for i, q in enumerate(sorted(set(int(q) for q in qubits)))}
        out = []
        for coeff, paulis in self.terms:
            if not paulis:
                out.append((coeff, {}))
                continue
            if not all(q in order for q, _ in paulis):
                raise ValueError(f"term {paulis} is not supported on qubits {sorted(order)}")
            out.append((coeff, {order[q]: ax for q, ax in paulis}))
        return Observable(out)

    def to_matrix(self, num_qubits: int) -> np.ndarray:
        """Dense matrix in the qubit-0-least-significant basis ordering."""
        if self.max_qubit() >= num_qubits:
            raise ValueError(f"observable touches qubit {self.max_qubit()}, register has {num_qubits}")
        dim = 1 << num_qubits
        out = np.zeros((dim, dim), dtype=np.complex128)
        for coeff, paulis in self.terms:
            axes = dict(paulis)
            term = np.array([[1.0]], dtype=np.complex128)
            for q in range(num_qubits - 1, -1, -1):
                term = np.kron(term, _PAULI[axes.get(q, "I")])
            out += coeff * term
        return out

    def to_sparse(self, num_qubits: int):
        """CSR matrix, same basis convention as to_matrix."""
        from scipy import sparse

        if self.max_qubit() >= num_qubits:
            raise ValueError(f"observable touches qubit {self.max_qubit()}, register has {num_qubits}")
        dim = 1 << num_qubits
        out = sparse.csr_matrix((dim, dim), dtype=np.complex128)
        for coeff, paulis in self.terms:
            axes = dict(paulis)
            term = sparse.identity(1, dtype=np.complex128, format="csr")
            for q in range(num_qubits - 1, -1, -1):
                term = sparse.kron(term, sparse.csr_matrix(_PAULI[axes.get(q, "I")]), format="csr")
            out = out + coeff * term
        return out


def one_local_z(num_qubits: int) -> Observable:
    """(1/N) sum_i Z_i, the cost observable used across the experiments."""
    if num_qubits < 1:
        raise ValueError("num_qubits must be >= 1")
    w = 1.0 / num_qubits
    return Observable([(w, {q: "Z"}) for q in range(num_qubits)])


def tfih(num_qubits: int, coupling: float = 1.0, field: float = 1.0,
         periodic: bool = True) -> Observable:
    """Transverse-field Ising chain -J sum Z_i Z_{i+1} - h sum X_i.

    With periodic boundary the N=2 ring visits the single bond twice, which
    merges into one ZZ term with doubled weight.
    """
    if num_qubits < 2:
        raise ValueError("num_qubits must be >= 2")
    bonds = num_qubits if periodic else num_qubits - 1
    terms = [(-coupling, {i: "Z", (i + 1) % num_qubits: "Z"}) for i in range(bonds)]
    terms += [(-field, {i: "X"}) for i in range(num_qubits)]
    return Observable(terms)
