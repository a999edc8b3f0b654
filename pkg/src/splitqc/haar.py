"""Haar-random unitaries and Monte-Carlo checks of the moment identities.

The key sampling decision: after QR-factorizing a complex Ginibre matrix the
diagonal phases of R must be divided out (Q alone is not Haar distributed).

Verifier reports are plain dicts so the CLI can dump them as JSON unchanged.
Estimates stream over fixed-size chunks with per-chunk derived seeds, and the
final reduction uses compensated summation, so reported means do not depend
on how the chunks were scheduled.
"""
from __future__ import annotations

from math import fsum, sqrt

import numpy as np

from ._seeding import rng_for

_CHUNK = 4096
# absolute floor so exact-by-construction estimates (zero scatter) still pass
_SE_FLOOR = 1e-12


def haar_batch(dim: int, count: int, rng) -> np.ndarray:
    """(count, dim, dim) stack of independent Haar unitaries."""
    if dim < 2:
        raise ValueError(f"dim must be >= 2, got {dim}")
    shape = (count, dim, dim)
    g = (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / np.sqrt(2.0)
    q, r = np.linalg.qr(g)
    diag = np.einsum("sii->si", r)
    return q * (diag / np.abs(diag))[:, None, :]


class HaarSampler:
    """Stateful convenience wrapper; draws are chunk-seeded off (seed, dim)."""

    def __init__(self, dim: int, seed: int):
        if dim < 2:
            raise ValueError(f"dim must be >= 2, got {dim}")
        self.dim = int(dim)
        self.seed = int(seed)
        self._chunk = 0

    def sample(self, count: int) -> np.ndarray:
        rng = rng_for(self.seed, "haar", self.dim, self._chunk)
        self._chunk += 1
        return haar_batch(self.dim, count, rng)

    def sample_one(self) -> np.ndarray:
        return self.sample(1)[0]


def _chunks(dim: int, total: int, seed: int, label: str):
    done, idx = 0, 0
    while done < total:
        take = min(_CHUNK, total - done)
        rng = rng_for(seed, label, dim, idx)
        yield haar_batch(dim, take, rng)
        done += take
        idx += 1


class _MeanAcc:
    """Streaming complex mean/SE with order-stable compensated reduction."""

    def __init__(self):
        self.re, self.im, self.sq = [], [], []
        self.n = 0

    def add(self, values: np.ndarray):
        values = np.asarray(values)
        self.re.append(float(np.sum(values.real)))
        self.im.append(float(np.sum(values.imag)))
        self.sq.append(float(np.sum(np.abs(values) ** 2)))
        self.n += values.size

    def mean(self) -> complex:
        return complex(fsum(self.re), fsum(self.im)) / self.n

    def standard_error(self) -> float:
        m = self.mean()
        var = max(fsum(self.sq) / self.n - abs(m) ** 2, 0.0)
        return sqrt(var / self.n)


def random_hermitian(dim: int, rng) -> np.ndarray:
    g = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
    return (g + g.conj().T) / 2.0


def _tr(m: np.ndarray) -> complex:
    return complex(np.trace(m))


def one_trace_oracle(a, b, d: int) -> complex:
    """E[Tr[U A Udag B]] = Tr[A] Tr[B] / d."""
    return _tr(a) * _tr(b) / d


def long_trace_oracle(a, b, c, dd, d: int) -> complex:
    """E[Tr[U A Udag B U C Udag D]] for Haar U."""
    ta, tb, tc, td = _tr(a), _tr(b), _tr(c), _tr(dd)
    tac, tbd = _tr(a @ c), _tr(b @ dd)
    return ((ta * tc * tbd + tac * tb * td) / (d * d - 1)
            - (tac * tbd + ta * tb * tc * td) / (d * (d * d - 1)))


def two_trace_oracle(a, b, c, dd, d: int) -> complex:
    """E[Tr[U A Udag B] Tr[U C Udag D]], standard second-moment pairing."""
    ta, tb, tc, td = _tr(a), _tr(b), _tr(c), _tr(dd)
    tac, tbd = _tr(a @ c), _tr(b @ dd)
    return ((ta * tc * tb * td + tac * tbd) / (d * d - 1)
            - (tac * tb * td + ta * tc * tbd) / (d * (d * d - 1)))


def second_moment_tensor(d: int) -> np.ndarray:
    """E[U_i1j1 U_i2j2 conj(U_k1m1) conj(U_k2m2)] as an 8-index tensor.

    Index order (i1, j1, i2, j2, k1, m1, k2, m2).
    """
    eye = np.eye(d)
    plus = (np.einsum("ae,bf,cg,dh->abcdefgh", eye, eye, eye, eye)
            + np.einsum("ag,bh,ce,df->abcdefgh", eye, eye, eye, eye))
    minus = (np.einsum("ae,bh,cg,df->abcdefgh", eye, eye, eye, eye)
             + np.einsum("ag,bf,ce,dh->abcdefgh", eye, eye, eye, eye))
    return plus / (d * d - 1) - minus / (d * (d * d - 1))


def _entry(estimate: complex, oracle: complex, se: float, sigmas: float) -> dict:
    err = abs(estimate - oracle)
    tol = sigmas * se + _SE_FLOOR
    return {
        "estimate_real": estimate.real,
        "estimate_imag": estimate.imag,
        "oracle": oracle.real,
        "abs_error": err,
        "standard_error": se,
        "tolerance": tol,
        "pass": bool(err < tol),
    }


def verify_first_moment(d: int, samples: int, seed: int) -> dict:
    """Empirical E[U_ij conj(U_km)] against delta_ik delta_jm / d, all tuples."""
    if samples < 10_000:
        raise ValueError("need at least 10^4 samples for a meaningful check")
    if d > 8:
        # d^4 tuples; past d=8 the accumulator and runtime stop being worth it
        raise ValueError("index-tuple check is restricted to d <= 8")
    sums = None
    n = 0
    for u in _chunks(d, samples, seed, "first"):
        t = np.einsum("sij,skm->ijkm", u, u.conj())
        sums = t if sums is None else sums + t
        n += u.shape[0]
    est = sums / n
    eye = np.eye(d)
    oracle = np.einsum("ik,jm->ijkm", eye, eye) / d
    max_err = float(np.max(np.abs(est - oracle)))
    se = 1.0 / sqrt(n)
    return {
        "dimension": d,
        "samples": n,
        "max_abs_error": max_err,
        "standard_error": se,
        "tolerance": 4.0 * se,
        "pass": bool(max_err < 4.0 * se),
    }


def verify_second_moment(samples: int, seed: int) -> dict:
    """Full 8-index empirical second moment at d=2 against the standard
    two-permutation formula. The check would fail against the mispaired
    variant sometimes written with a d^2+1 denominator, which is why the
    oracle here is built from `second_moment_tensor`."""
    d = 2
    sums = None
    n = 0
    for u in _chunks(d, samples, seed, "second"):
        t = np.einsum("sab,scd,sef,sgh->abcdefgh", u, u, u.conj(), u.conj())
        sums = t if sums is None else sums + t
        n += u.shape[0]
    est = sums / n
    max_err = float(np.max(np.abs(est - second_moment_tensor(d))))
    se = 1.0 / sqrt(n)
    return {
        "dimension": d,
        "samples": n,
        "max_abs_error": max_err,
        "standard_error": se,
        "tolerance": 4.0 * se,
        "pass": bool(max_err < 4.0 * se),
    }


def verify_trace_identities(d: int, samples: int, seed: int, a=None, b=None,
                            c=None, dd=None, sigmas: float = 4.0) -> dict:
    """Monte-Carlo checks of the one-trace, long-trace and two-trace averages.

    Test matrices default to four independent random Hermitians drawn off the
    same seed, so the oracle and the estimate always see identical inputs.
    """
    rng = rng_for(seed, "matrices", d)
    mats = [m if m is not None else random_hermitian(d, rng)
            for m in (a, b, c, dd)]
    for m in mats:
        if m.shape != (d, d):
            raise ValueError(f"matrix shape {m.shape} does not match dimension {d}")
    a, b, c, dd = (np.asarray(m, dtype=np.complex128) for m in mats)
    acc1, acc2, acc3 = _MeanAcc(), _MeanAcc(), _MeanAcc()
    for u in _chunks(d, samples, seed, "traces"):
        udag = u.conj().transpose(0, 2, 1)
        ma = np.matmul(np.matmul(u, a), udag)
        mc = np.matmul(np.matmul(u, c), udag)
        t_ab = np.einsum("sij,ji->s", ma, b)
        t_cd = np.einsum("sij,ji->s", mc, dd)
        acc1.add(t_ab)
        acc2.add(np.einsum("sij,jk,skl,li->s", ma, b, mc, dd))
        acc3.add(t_ab * t_cd)
    return {
        "dimension": d,
        "samples": acc1.n,
        "one_trace": _entry(acc1.mean(), one_trace_oracle(a, b, d), acc1.standard_error(), sigmas),
        "long_trace": _entry(acc2.mean(), long_trace_oracle(a, b, c, dd, d), acc2.standard_error(), sigmas),
        "two_trace": _entry(acc3.mean(), two_trace_oracle(a, b, c, dd, d), acc3.standard_error(), sigmas),
    }


def closed_form_gradient_variance(rho, obs, gen) -> float:
    """Variance of the first-order cost gradient when both circuit halves are
    Haar: -(Tr[rho^2] - 1/d) * 2/(d^2-1) * (I1 - I2) with I1 the long-trace
    average of Tr[UVUdagO UVUdagO] and I2 = Tr[V^2]Tr[O^2]/d."""
    d = rho.shape[0]
    tr_rho2 = float(np.trace(rho @ rho).real)
    tv = float(np.trace(gen).real)
    to = float(np.trace(obs).real)
    tv2 = float(np.trace(gen @ gen).real)
    to2 = float(np.trace(obs @ obs).real)
    i1 = ((tv * tv * to2 + tv2 * to * to) / (d * d - 1)
          - (tv2 * to2 + tv * tv * to * to) / (d * (d * d - 1)))
    i2 = tv2 * to2 / d
    return float(-(tr_rho2 - 1.0 / d) * 2.0 / (d * d - 1) * (i1 - i2))


def variance_formula_check(num_qubits: int, samples: int, seed: int,
                           gen=None, obs=None, rho=None) -> dict:
    """Sampled gradient variance against the closed form.

    Draws independent Haar halves U-, U+ per sample and evaluates
    g = i Tr[[V, U+dag O U+] U- rho U-dag]; reports the sample mean (should
    vanish), the sample variance, and the closed-form prediction.

    Defaults: V = Y/2 on qubit 0, O = (1/N) sum Z_i, rho = |0...0><0...0|.
    """
    if num_qubits < 1 or num_qubits > 3:
        raise ValueError("num_qubits must be between 1 and 3")
    from .observables import one_local_z

    d = 1 << num_qubits
    if gen is None:
        y = np.array([[0, -1j], [1j, 0]], dtype=np.complex128) / 2.0
        gen = np.kron(np.eye(d // 2), y)  # qubit 0 is the least significant
    if obs is None:
        obs = one_local_z(num_qubits).to_matrix(num_qubits)
    if rho is None:
        rho = np.zeros((d, d), dtype=np.complex128)
        rho[0, 0] = 1.0
    gen = np.asarray(gen, dtype=np.complex128)
    obs = np.asarray(obs, dtype=np.complex128)
    rho = np.asarray(rho, dtype=np.complex128)
    acc = _MeanAcc()
    sq = _MeanAcc()
    idx = 0
    done = 0
    while done < samples:
        take = min(_CHUNK, samples - done)
        u_plus = haar_batch(d, take, rng_for(seed, "var-plus", d, idx))
        u_minus = haar_batch(d, take, rng_for(seed, "var-minus", d, idx))
        m = np.matmul(u_plus.conj().transpose(0, 2, 1), np.matmul(obs, u_plus))
        comm = np.matmul(gen, m) - np.matmul(m, gen)
        p = np.matmul(u_minus, np.matmul(rho, u_minus.conj().transpose(0, 2, 1)))
        g = 1j * np.einsum("sij,sji->s", comm, p)
        acc.add(g.real)
        sq.add(g.real ** 2)
        done += take
        idx += 1
    mean = acc.mean().real
    mean_se = acc.standard_error()
    var = sq.mean().real - mean * mean
    var_se = sq.standard_error()
    oracle = closed_form_gradient_variance(rho, obs, gen)
    rel = abs(var - oracle) / abs(oracle)
    return {
        "dimension": d,
        "samples": acc.n,
        "mean": mean,
        "mean_standard_error": mean_se,
        "mean_pass": bool(abs(mean) < 4.0 * mean_se + _SE_FLOOR),
        "sampled_variance": var,
        "variance_standard_error": var_se,
        "closed_form": oracle,
        "relative_error": rel,
        "pass": bool(rel < 0.05),
    }


def haar_report(dims=(2, 4, 8), samples: int = 100_000, seed: int = 7) -> dict:
    """Everything the haar-verify subcommand emits, as one JSON-ready dict."""
    report: dict = {"samples": samples, "seed": seed, "dimensions": list(dims)}
    report["first_moment"] = [verify_first_moment(d, samples, seed)
                              for d in dims]
    report["second_moment_d2"] = verify_second_moment(samples, seed)
    report["trace_identities"] = [verify_trace_identities(d, samples, seed)
                                  for d in dims]
    report["gradient_variance"] = [variance_formula_check(n, samples, seed)
                                   for n in (1, 2, 3)]
    report["pass"] = all(
        [e["pass"] for e in report["first_moment"]]
        + [report["second_moment_d2"]["pass"]]
        + [e[k]["pass"] for e in report["trace_identities"]
           for k in ("one_trace", "long_trace", "two_trace")]
        + [e["pass"] and e["mean_pass"] for e in report["gradient_variance"]]
    )
    return report
