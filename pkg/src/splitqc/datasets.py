"""Dataset generation and persistence for the two classification tasks.

Classical side: clustered hypercube-vertex data with exact label flipping and
a [0, pi] angle rescale so each feature maps onto one RY rotation.

Quantum side: states drawn from a fixed hardware-efficient circuit whose
per-class parameters are optimized so the emitted distribution centers on a
target concentrable-entanglement value. Only generating parameters are
persisted; states are regenerated deterministically on load.
"""
from __future__ import annotations

import csv
import hashlib
import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from ._seeding import rng_for
from .ansatz import build_hea_u3
from .optimizers import AdamState, adam_step
from .statevector import concentrable_entanglement_batch, run_circuit_batch

CLASSICAL_SCHEMA = "splitqc.classical.v1"
QUANTUM_SCHEMA = "splitqc.quantum.v1"

ALLOWED_FEATURES = (4, 8, 16)
ALLOWED_QUBITS = (4, 8)
TRAIN_FRACTION = 0.7


@dataclass(frozen=True)
class ClassicalDataset:
    features: np.ndarray  # (samples, n) angles in [0, pi]
    labels: np.ndarray    # (samples,) values in {0, 1}
    train_idx: np.ndarray
    test_idx: np.ndarray

    @property
    def n_features(self) -> int:
        return self.features.shape[1]

    def __eq__(self, other):
        if not isinstance(other, ClassicalDataset):
            return NotImplemented
        return (np.array_equal(self.features, other.features)
                and np.array_equal(self.labels, other.labels)
                and np.array_equal(self.train_idx, other.train_idx)
                and np.array_equal(self.test_idx, other.test_idx))


@dataclass(frozen=True)
class QuantumDataset:
    num_qubits: int
    depth: int
    ce_targets: tuple
    group_a: np.ndarray   # (samples, 3n) per-sample input angles
    group_b: np.ndarray   # (2, 3n*depth) trained per-class angles
    labels: np.ndarray
    ce_values: np.ndarray
    train_idx: np.ndarray
    test_idx: np.ndarray

    def states(self, indices=None) -> np.ndarray:
        """Regenerate the (B, 2^n) amplitudes for the given sample rows."""
        hea = build_hea_u3(self.num_qubits, self.depth)
        idx = np.arange(self.labels.size) if indices is None else np.asarray(indices)
        params = np.hstack([self.group_a[idx], self.group_b[self.labels[idx]]])
        return run_circuit_batch(hea.circuit, params)

    def __eq__(self, other):
        if not isinstance(other, QuantumDataset):
            return NotImplemented
        return (self.num_qubits == other.num_qubits and self.depth == other.depth
                and self.ce_targets == other.ce_targets
                and np.array_equal(self.group_a, other.group_a)
                and np.array_equal(self.group_b, other.group_b)
                and np.array_equal(self.labels, other.labels)
                and np.array_equal(self.ce_values, other.ce_values)
                and np.array_equal(self.train_idx, other.train_idx)
                and np.array_equal(self.test_idx, other.test_idx))


def _split_indices(n_samples: int, rng) -> tuple:
    train_count = round(TRAIN_FRACTION * n_samples)
    perm = rng.permutation(n_samples)
    return np.sort(perm[:train_count]), np.sort(perm[train_count:])


def gen_hypercube_classification(n_features: int, n_samples: int = 600,
                                 class_sep: float = 1.0, flip_frac: float = 0.02,
                                 seed: int = 0) -> ClassicalDataset:
    """Two clusters per class at hypercube vertices, with Gaussian scatter, a
    random rotation and an exact round(flip_frac * n) label flips.

    The two classes sit on opposite sides of the first coordinate before
    rotation, so at large class_sep the problem stays linearly separable.
    """
    if n_features not in ALLOWED_FEATURES:
        raise ValueError(f"n_features must be one of {ALLOWED_FEATURES}, got {n_features}")
    if not 0.0 <= flip_frac < 0.5:
        raise ValueError(f"flip_frac must be in [0, 0.5), got {flip_frac}")
    if n_samples < 8 or n_samples % 4:
        raise ValueError(f"n_samples must be a positive multiple of 4, got {n_samples}")
    rng = rng_for(seed, "hypercube", n_features)

    vertices = np.empty((4, n_features))
    while True:
        tails = rng.integers(0, 2, size=(4, n_features - 1)) * 2 - 1
        vertices[:2, 0], vertices[2:, 0] = 1.0, -1.0
        vertices[:, 1:] = tails
        if not np.array_equal(vertices[0], vertices[1]) \
                and not np.array_equal(vertices[2], vertices[3]):
            break
    per_cluster = n_samples // 4
    assignment = np.repeat(np.arange(4), per_cluster)
    features = vertices[assignment] * class_sep + rng.standard_normal((n_samples, n_features))
    labels = (assignment >= 2).astype(np.int64)

    rotation, _ = np.linalg.qr(rng.standard_normal((n_features, n_features)))
    features = features @ rotation.T

    n_flips = round(flip_frac * n_samples)
    if n_flips:
        flip_at = rng.choice(n_samples, size=n_flips, replace=False)
        labels[flip_at] ^= 1

    lo = features.min(axis=0)
    hi = features.max(axis=0)
    features = (features - lo) / (hi - lo) * np.pi

    train_idx, test_idx = _split_indices(n_samples, rng)
    return ClassicalDataset(features, labels, train_idx, test_idx)


def _mean_ce_stack(hea, a_batch: np.ndarray, b_stack: np.ndarray, n: int) -> np.ndarray:
    """Mean CE over a_batch for every row of b_stack, in one simulator call."""
    n_b, n_states = b_stack.shape[0], a_batch.shape[0]
    params = np.empty((n_b * n_states, a_batch.shape[1] + b_stack.shape[1]))
    params[:, :a_batch.shape[1]] = np.tile(a_batch, (n_b, 1))
    params[:, a_batch.shape[1]:] = np.repeat(b_stack, n_states, axis=0)
    amps = run_circuit_batch(hea.circuit, params)
    return concentrable_entanglement_batch(amps, n).reshape(n_b, n_states).mean(axis=1)


def _fit_ce_target(n: int, target: float, cls: int, seed: int, depth: int,
                   train_batch: int, max_steps: int, lr: float,
                   fd_step: float, tol: float):
    """ADAM on the squared CE error; finite differences reuse one frozen
    group-A batch so the objective is deterministic across steps."""
    hea = build_hea_u3(n, depth)
    na, nb = hea.group_a.size, hea.group_b.size
    a_train = rng_for(seed, "ce-train-a", n, cls).uniform(-1.0, 1.0, (train_batch, na))
    b = rng_for(seed, "ce-init-b", n, cls).normal(0.0, 0.1, nb)
    state = AdamState.init(nb, lr=lr)
    eye = np.eye(nb)
    achieved = np.inf
    for _ in range(max_steps):
        stack = np.vstack([b[None, :], b + fd_step * eye, b - fd_step * eye])
        means = _mean_ce_stack(hea, a_train, stack, n)
        achieved = float(means[0])
        if abs(achieved - target) < tol:
            break
        d_mean = (means[1:1 + nb] - means[1 + nb:]) / (2.0 * fd_step)
        state, b = adam_step(state, b, 2.0 * (achieved - target) * d_mean)
    return hea, b, achieved


def gen_quantum_ce_dataset(num_qubits: int, ce_targets, per_class: int = 300,
                           seed: int = 0, depth: int = 5, train_batch: int | None = None,
                           max_steps: int = 250, lr: float = 0.05,
                           fd_step: float = 1e-3, tol: float = 0.01) -> QuantumDataset:
    if num_qubits not in ALLOWED_QUBITS:
        raise ValueError(f"num_qubits must be one of {ALLOWED_QUBITS}, got {num_qubits}")
    ce_targets = tuple(float(t) for t in ce_targets)
    if len(ce_targets) != 2:
        raise ValueError("ce_targets must hold exactly two values")
    if any(t < 0.0 or t >= 0.5 for t in ce_targets):
        raise ValueError(f"targets {ce_targets} outside the reachable CE range [0, 0.5)")
    if per_class < 2 or (2 * per_class) % 10:
        raise ValueError("per_class must make the 70/30 split integral")
    if train_batch is None:
        train_batch = 96 if num_qubits <= 4 else 48

    group_a_parts, ce_parts, b_rows = [], [], []
    for cls, target in enumerate(ce_targets):
        hea, b, achieved = _fit_ce_target(num_qubits, target, cls, seed, depth,
                                          train_batch, max_steps, lr, fd_step, tol)
        a_fresh = rng_for(seed, "ce-emit-a", num_qubits, cls).uniform(
            -1.0, 1.0, (per_class, hea.group_a.size))
        params = np.hstack([a_fresh, np.tile(b, (per_class, 1))])
        ce = concentrable_entanglement_batch(
            run_circuit_batch(hea.circuit, params), num_qubits)
        median = float(np.median(ce))
        if abs(median - target) >= 0.05:
            raise RuntimeError(
                f"class {cls}: emitted CE median {median:.4f} missed target {target} "
                f"by >= 0.05 (training mean reached {achieved:.4f})")
        group_a_parts.append(a_fresh)
        ce_parts.append(ce)
        b_rows.append(b)

    labels = np.repeat(np.arange(2), per_class)
    train_idx, test_idx = _split_indices(2 * per_class,
                                         rng_for(seed, "ce-split", num_qubits))
    return QuantumDataset(num_qubits, depth, ce_targets,
                          np.vstack(group_a_parts), np.vstack(b_rows), labels,
                          np.concatenate(ce_parts), train_idx, test_idx)


def _fmt(x: float) -> str:
    return format(float(x), ".17g")


def save_dataset(dataset, path) -> None:
    """Classical datasets go to one CSV file; quantum datasets to a directory
    holding a manifest plus the generating-parameter tables."""
    path = Path(path)
    if isinstance(dataset, ClassicalDataset):
        _save_classical(dataset, path)
    elif isinstance(dataset, QuantumDataset):
        _save_quantum(dataset, path)
    else:
        raise TypeError(f"cannot save {type(dataset).__name__}")


def _save_classical(ds: ClassicalDataset, path: Path) -> None:
    train = set(ds.train_idx.tolist())
    with open(path, "w", newline="") as fh:
        fh.write(f"# schema={CLASSICAL_SCHEMA}\n")
        writer = csv.writer(fh)
        writer.writerow([f"f{i}" for i in range(ds.n_features)] + ["label", "split"])
        for row in range(ds.labels.size):
            writer.writerow([_fmt(v) for v in ds.features[row]]
                            + [int(ds.labels[row]), "train" if row in train else "test"])


def _load_classical(path: Path) -> ClassicalDataset:
    with open(path, newline="") as fh:
        schema = fh.readline().strip()
        if schema != f"# schema={CLASSICAL_SCHEMA}":
            raise ValueError(f"unexpected schema line {schema!r}")
        reader = csv.reader(fh)
        header = next(reader)
        n_feat = len(header) - 2
        if header != [f"f{i}" for i in range(n_feat)] + ["label", "split"]:
            raise ValueError(f"unexpected header {header}")
        feats, labels, split = [], [], []
        for row in reader:
            if len(row) != len(header):
                raise ValueError(f"malformed row {row}")
            feats.append([float(v) for v in row[:n_feat]])
            labels.append(int(row[n_feat]))
            if row[-1] not in ("train", "test"):
                raise ValueError(f"bad split tag {row[-1]!r}")
            split.append(row[-1])
    split = np.asarray(split)
    return ClassicalDataset(np.asarray(feats), np.asarray(labels, dtype=np.int64),
                            np.nonzero(split == "train")[0], np.nonzero(split == "test")[0])


def _sha256(path: Path) -> str:
    return hashlib.sha256(path.read_bytes()).hexdigest()


def _save_quantum(ds: QuantumDataset, path: Path) -> None:
    path.mkdir(parents=True, exist_ok=True)
    train = set(ds.train_idx.tolist())
    a_path, b_path = path / "group_a.csv", path / "group_b.csv"
    with open(a_path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["label", "split", "ce"]
                        + [f"a{i}" for i in range(ds.group_a.shape[1])])
        for row in range(ds.labels.size):
            writer.writerow([int(ds.labels[row]), "train" if row in train else "test",
                             _fmt(ds.ce_values[row])]
                            + [_fmt(v) for v in ds.group_a[row]])
    with open(b_path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["class"] + [f"b{i}" for i in range(ds.group_b.shape[1])])
        for cls in range(ds.group_b.shape[0]):
            writer.writerow([cls] + [_fmt(v) for v in ds.group_b[cls]])
    manifest = {
        "schema": QUANTUM_SCHEMA,
        "num_qubits": ds.num_qubits,
        "depth": ds.depth,
        "ce_targets": list(ds.ce_targets),
        "samples": int(ds.labels.size),
        "files": {p.name: _sha256(p) for p in (a_path, b_path)},
    }
    (path / "manifest.json").write_text(json.dumps(manifest, indent=2) + "\n")


def _load_quantum(path: Path) -> QuantumDataset:
    manifest = json.loads((path / "manifest.json").read_text())
    if manifest.get("schema") != QUANTUM_SCHEMA:
        raise ValueError(f"unexpected schema {manifest.get('schema')!r}")
    for name, digest in manifest["files"].items():
        actual = _sha256(path / name)
        if actual != digest:
            raise ValueError(f"checksum mismatch for {name}")
    a_rows, labels, split, ce = [], [], [], []
    with open(path / "group_a.csv", newline="") as fh:
        reader = csv.reader(fh)
        next(reader)
        for row in reader:
            labels.append(int(row[0]))
            split.append(row[1])
            ce.append(float(row[2]))
            a_rows.append([float(v) for v in row[3:]])
    b_rows = {}
    with open(path / "group_b.csv", newline="") as fh:
        reader = csv.reader(fh)
        next(reader)
        for row in reader:
            b_rows[int(row[0])] = [float(v) for v in row[1:]]
    split = np.asarray(split)
    ds = QuantumDataset(int(manifest["num_qubits"]), int(manifest["depth"]),
                        tuple(manifest["ce_targets"]), np.asarray(a_rows),
                        np.asarray([b_rows[c] for c in sorted(b_rows)]),
                        np.asarray(labels, dtype=np.int64), np.asarray(ce),
                        np.nonzero(split == "train")[0], np.nonzero(split == "test")[0])
    if ds.labels.size != manifest["samples"]:
        raise ValueError("sample count does not match the manifest")
    return ds


def load_dataset(path):
    path = Path(path)
    if path.is_dir():
        return _load_quantum(path)
    return _load_classical(path)
