"""Variance scans over random parameter draws.

Each (N, m, L, T) cell draws parameter vectors uniformly from [0, 2pi] and
records the variance of either the pairwise cost difference or the first
parameter's gradient. Per-sample seeds are derived from
(seed, N, m, L, T, sample index), so parallel and serial runs produce the
same records.

When T = 0 and every observable term fits inside one block, cells are
evaluated block by block; that keeps the memory footprint at 2^m instead of
2^N and is what makes wide split cells (N well beyond full-simulation reach)
cheap.
"""
from __future__ import annotations

import csv
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace

import numpy as np

from ._seeding import rng_for
from .ansatz import SplitSpec, build_cs, build_ecs, project_blocks, split_observable
from .circuits import Circuit
from .gradients import parameter_shift_gradient
from .observables import Observable, one_local_z, tfih
from .statevector import expectation_batch, run_circuit_batch

STATISTICS = ("delta_cost", "first_param_grad")
OBSERVABLES = ("one_local_z", "tfih")
M_SENTINEL = "n"

CSV_SCHEMA = "splitqc.variance.v1"
CSV_COLUMNS = ("n", "m", "l", "t", "statistic", "variance", "sample_count", "seed")

# full-register simulation cap; split cells go wider through the block path
MAX_FULL_QUBITS = 14
_BATCH_AMPS = 1 << 22  # amplitudes per simulation chunk, ~64 MB complex128


@dataclass(frozen=True)
class ScanConfig:
    """Grid description for one scan.

    m values may include the sentinel string "n", meaning m = N in every
    cell. Integer m values only generate cells for the N they divide.
    """

    n_values: tuple
    m_values: tuple
    l_values: tuple
    t_values: tuple = (0,)
    samples: int = 2000
    seed: int = 0
    statistic: str = "delta_cost"
    observable: str = "one_local_z"
    block_family: str = "ladder_ry_cx"

    def __post_init__(self):
        object.__setattr__(self, "n_values", tuple(int(v) for v in self.n_values))
        object.__setattr__(self, "l_values", tuple(int(v) for v in self.l_values))
        object.__setattr__(self, "t_values", tuple(int(v) for v in self.t_values))
        ms = []
        for m in self.m_values:
            if isinstance(m, str):
                if m.lower() != M_SENTINEL:
                    raise ValueError(f"m entries must be integers or {M_SENTINEL!r}, got {m!r}")
                ms.append(M_SENTINEL)
            else:
                ms.append(int(m))
        object.__setattr__(self, "m_values", tuple(ms))
        if not self.n_values or not self.m_values or not self.l_values:
            raise ValueError("n, m and l grids must be non-empty")
        if self.samples < 2:
            raise ValueError("samples must be >= 2")
        if self.statistic not in STATISTICS:
            raise ValueError(f"statistic must be one of {STATISTICS}, got {self.statistic!r}")
        if self.observable not in OBSERVABLES:
            raise ValueError(f"observable must be one of {OBSERVABLES}, got {self.observable!r}")
        for m in self.m_values:
            if m == M_SENTINEL:
                continue
            if m < 1:
                raise ValueError(f"m must be >= 1, got {m}")
            if not any(n % m == 0 for n in self.n_values):
                raise ValueError(f"m={m} divides none of the N values {self.n_values}")

    def cells(self):
        """All valid (n, m, l, t) cells, skipping m that do not divide n."""
        out = []
        for n in self.n_values:
            for m in self.m_values:
                m_eff = n if m == M_SENTINEL else m
                if n % m_eff:
                    continue
                for l in self.l_values:
                    for t in self.t_values:
                        out.append((n, m_eff, l, t))
        return out


@dataclass(frozen=True)
class VarianceRecord:
    n: int
    m: int
    l: int
    t: int
    statistic: str
    variance: float
    sample_count: int
    seed: int

    def __post_init__(self):
        if not np.isfinite(self.variance) or self.variance < 0:
            raise ValueError(f"variance must be finite and >= 0, got {self.variance}")


def _observable_for(name: str, n: int) -> Observable:
    if name == "one_local_z":
        return one_local_z(n)
    return tfih(n)


def _draw_params(seed: int, n: int, m: int, l: int, t: int,
                 count: int, num_params: int) -> np.ndarray:
    out = np.empty((count, num_params), dtype=np.float64)
    for i in range(count):
        rng = rng_for(seed, "bp", n, m, l, t, i)
        out[i] = rng.uniform(0.0, 2.0 * np.pi, num_params)
    return out


def _batched_costs(circuit: Circuit, params: np.ndarray, obs: Observable) -> np.ndarray:
    """Costs for a (B, P) parameter stack, chunked to bound peak memory."""
    dim = 1 << circuit.num_qubits
    chunk = max(1, _BATCH_AMPS // dim)
    out = np.empty(params.shape[0], dtype=np.float64)
    for lo in range(0, params.shape[0], chunk):
        batch = params[lo:lo + chunk]
        amps = run_circuit_batch(circuit, batch)
        out[lo:lo + batch.shape[0]] = expectation_batch(amps, circuit.num_qubits, obs)
    return out


class _CellEvaluator:
    """Cost and first-gradient evaluation for one cell, choosing the full or
    per-block strategy once up front."""

    def __init__(self, n: int, m: int, l: int, t: int, observable: str, family: str):
        self.obs_name = observable
        if l == 0 and t == 0:
            self.circuit = Circuit(n, [], 0)
            self.views = None
            return
        spec = SplitSpec(n, m, l, standard_layers=t, block_family=family)
        self.circuit = build_cs(spec) if t == 0 else build_ecs(spec)
        self.views = None
        if t == 0 and m < n:
            parts = split_observable(_observable_for(observable, n), spec.blocks)
            if parts is not None:
                self.views = list(zip(project_blocks(self.circuit, spec.blocks), parts))
        if self.views is None and n > MAX_FULL_QUBITS:
            raise ValueError(
                f"cell N={n} needs a full {n}-qubit simulation (cap {MAX_FULL_QUBITS}); "
                "only split cells with a block-local observable may go wider")

    @property
    def num_params(self) -> int:
        return self.circuit.num_params

    def costs(self, params: np.ndarray) -> np.ndarray:
        if self.views is None:
            obs = _observable_for(self.obs_name, self.circuit.num_qubits)
            return _batched_costs(self.circuit, params, obs)
        total = np.zeros(params.shape[0], dtype=np.float64)
        for view, part in self.views:
            total += _batched_costs(view.circuit, params[:, view.param_map], part)
        return total

    def first_param_gradients(self, params: np.ndarray) -> np.ndarray:
        """d cost / d theta_0 per row, via the shift rule on parameter 0."""
        if self.num_params == 0:
            return np.zeros(params.shape[0], dtype=np.float64)
        if self.views is not None:
            # theta_0 always lives in the first block
            for view, part in self.views:
                hit = np.nonzero(view.param_map == 0)[0]
                if hit.size:
                    local = params[:, view.param_map]
                    return self._shift_on(view.circuit, local, part, int(hit[0]))
            return np.zeros(params.shape[0], dtype=np.float64)
        obs = _observable_for(self.obs_name, self.circuit.num_qubits)
        return self._shift_on(self.circuit, params, obs, 0)

    def _shift_on(self, circuit: Circuit, params: np.ndarray, obs: Observable,
                  index: int) -> np.ndarray:
        occurrences = circuit.param_occurrences(index)
        if not occurrences:
            return np.zeros(params.shape[0], dtype=np.float64)
        if len(occurrences) == 1:
            # the common case batches: shift the whole column at once
            plus = params.copy()
            minus = params.copy()
            plus[:, index] += np.pi / 2
            minus[:, index] -= np.pi / 2
            return 0.5 * (_batched_costs(circuit, plus, obs)
                          - _batched_costs(circuit, minus, obs))
        grad = np.empty(params.shape[0], dtype=np.float64)
        for row in range(params.shape[0]):
            grad[row] = parameter_shift_gradient(circuit, params[row], obs)[index]
        return grad


def _cell_record(config: ScanConfig, cell) -> VarianceRecord:
    n, m, l, t = cell
    ev = _CellEvaluator(n, m, l, t, config.observable, config.block_family)
    if ev.num_params == 0:
        return VarianceRecord(n, m, l, t, config.statistic, 0.0, config.samples, config.seed)
    # with no split layers the block size is irrelevant, so canonicalize the
    # seed input and different-m cells at L=0 agree bit-exactly
    m_seed = n if l == 0 else m
    if config.statistic == "delta_cost":
        draws = _draw_params(config.seed, n, m_seed, l, t, 2 * config.samples, ev.num_params)
        costs = ev.costs(draws)
        values = costs[0::2] - costs[1::2]
    else:
        draws = _draw_params(config.seed, n, m_seed, l, t, config.samples, ev.num_params)
        values = ev.first_param_gradients(draws)
    return VarianceRecord(n, m, l, t, config.statistic,
                          float(np.var(values, ddof=1)), config.samples, config.seed)


def run_scan(config: ScanConfig, workers: int = 1) -> list:
    """Evaluate every cell; record order follows the sorted cell grid."""
    cells = sorted(set(config.cells()))
    if not cells:
        raise ValueError("scan grid is empty")
    if workers > 1 and len(cells) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(_cell_record, [config] * len(cells), cells))
    return [_cell_record(config, cell) for cell in cells]


def scan_delta_cost(config: ScanConfig, workers: int = 1) -> list:
    return run_scan(replace(config, statistic="delta_cost"), workers)


def scan_first_param_gradient(config: ScanConfig, workers: int = 1) -> list:
    return run_scan(replace(config, statistic="first_param_grad"), workers)


def scan_layers(config: ScanConfig, workers: int = 1) -> list:
    """Alias of the delta-cost scan; express the sweep through l_values."""
    if max(config.l_values) > 200:
        raise ValueError("layer scans are capped at L = 200")
    return scan_delta_cost(config, workers)


def scan_ecs(config: ScanConfig, total_depth: int, workers: int = 1) -> list:
    """Sweep T with L = D - T at fixed total depth D (t_values is the grid)."""
    if total_depth < 1:
        raise ValueError("total_depth must be >= 1")
    records = []
    for t in sorted(set(config.t_values)):
        if t < 0 or t > total_depth:
            raise ValueError(f"T={t} outside [0, {total_depth}]")
        sub = replace(config, l_values=(total_depth - t,), t_values=(t,))
        records.extend(run_scan(sub, workers))
    return sorted(records, key=lambda r: (r.n, r.m, r.l, r.t))


def fit_decay(records, x_axis: str = "n", log_x: bool = False) -> dict:
    """Least-squares fit of log2(variance) against N or L.

    With log_x the abscissa is log2 as well, so polynomial decay N^-p fits
    with slope -p. Zero-variance records cannot enter a log fit and are
    dropped with a warning.
    """
    if x_axis not in ("n", "l"):
        raise ValueError(f"x_axis must be 'n' or 'l', got {x_axis!r}")
    xs, ys = [], []
    dropped = 0
    for rec in records:
        if rec.variance <= 0.0:
            dropped += 1
            continue
        x = rec.n if x_axis == "n" else rec.l
        xs.append(np.log2(x) if log_x else float(x))
        ys.append(np.log2(rec.variance))
    if dropped:
        warnings.warn(f"excluded {dropped} zero-variance records from the decay fit")
    if len(xs) < 3:
        raise ValueError(f"need at least 3 usable records, have {len(xs)}")
    xs = np.asarray(xs)
    ys = np.asarray(ys)
    slope, intercept = np.polyfit(xs, ys, 1)
    fitted = slope * xs + intercept
    ss_res = float(np.sum((ys - fitted) ** 2))
    ss_tot = float(np.sum((ys - ys.mean()) ** 2))
    r2 = 1.0 if ss_tot == 0.0 else 1.0 - ss_res / ss_tot
    return {"slope": float(slope), "intercept": float(intercept),
            "r_squared": r2, "points": len(xs)}


def write_records_csv(records, path) -> None:
    with open(path, "w", newline="") as fh:
        fh.write(f"# schema={CSV_SCHEMA}\n")
        writer = csv.writer(fh)
        writer.writerow(CSV_COLUMNS)
        for r in records:
            writer.writerow([r.n, r.m, r.l, r.t, r.statistic,
                             format(r.variance, ".17g"), r.sample_count, r.seed])


def read_records_csv(path) -> list:
    with open(path, newline="") as fh:
        first = fh.readline().strip()
        if first != f"# schema={CSV_SCHEMA}":
            raise ValueError(f"unexpected schema line {first!r}")
        reader = csv.DictReader(fh)
        return [VarianceRecord(int(row["n"]), int(row["m"]), int(row["l"]), int(row["t"]),
                               row["statistic"], float(row["variance"]),
                               int(row["sample_count"]), int(row["seed"]))
                for row in reader]
