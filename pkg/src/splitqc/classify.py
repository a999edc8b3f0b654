"""Binary classification with split-circuit readout.

Model: features enter as one RY angle per qubit (or as prepared amplitude
vectors), the ansatz runs, and the label score is yhat = (<O> + 1)/2 with the
1-local averaged-Z observable. Training is ADAM on mean binary cross entropy
with exact parameter-shift gradients.

For T = 0 circuits on product encodings the forward and backward passes run
block by block; the full register is never materialized.
"""
from __future__ import annotations

from dataclasses import dataclass
from math import fsum

import numpy as np
from sklearn.base import BaseEstimator, ClassifierMixin

from ._seeding import rng_for
from .ansatz import BlockView, SplitSpec, build_cs, build_ecs, project_blocks, split_observable
from .observables import Observable, one_local_z
from .optimizers import AdamState, adam_step
from .statevector import expectation_batch, run_circuit_batch

BCE_EPS = 1e-7


def bce_loss(y, yhat) -> float:
    """Mean binary cross entropy with predictions clamped to [eps, 1-eps]."""
    y = np.asarray(y, dtype=np.float64)
    yhat = np.clip(np.asarray(yhat, dtype=np.float64), BCE_EPS, 1.0 - BCE_EPS)
    per_sample = -(y * np.log(yhat) + (1.0 - y) * np.log1p(-yhat))
    return fsum(per_sample.tolist()) / per_sample.size


def product_state_amps(angles: np.ndarray) -> np.ndarray:
    """(B, n) RY angles -> (B, 2^n) product-state amplitudes, qubit 0 least
    significant."""
    angles = np.asarray(angles, dtype=np.float64)
    if angles.ndim != 2:
        raise ValueError(f"expected (B, n) angles, got shape {angles.shape}")
    b = angles.shape[0]
    amps = np.ones((b, 1), dtype=np.complex128)
    for q in range(angles.shape[1]):
        factor = np.empty((b, 2), dtype=np.complex128)
        factor[:, 0] = np.cos(angles[:, q] / 2.0)
        factor[:, 1] = np.sin(angles[:, q] / 2.0)
        amps = (factor[:, :, None] * amps[:, None, :]).reshape(b, -1)
    return amps


@dataclass(frozen=True)
class _Path:
    """One independently simulable piece: a sub-circuit, the feature columns
    feeding it, its observable share and its slice of the parameter vector."""

    qubits: tuple
    view: BlockView
    observable: Observable


def predict_values(circuit, params, inputs, input_mode: str = "angles") -> np.ndarray:
    """yhat = (<O> + 1)/2 over the full register; reference path used by the
    estimator's tests and for amplitude inputs."""
    n = circuit.num_qubits
    obs = one_local_z(n)
    inputs = np.asarray(inputs)
    if input_mode == "angles":
        if inputs.shape[1] != n:
            raise ValueError(f"expected {n} features, got {inputs.shape[1]}")
        initial = product_state_amps(inputs)
    elif input_mode == "amplitudes":
        if inputs.shape[1] != 1 << n:
            raise ValueError(f"expected {1 << n} amplitudes, got {inputs.shape[1]}")
        initial = np.ascontiguousarray(inputs, dtype=np.complex128)
    else:
        raise ValueError(f"input_mode must be 'angles' or 'amplitudes', got {input_mode!r}")
    amps = run_circuit_batch(circuit, np.asarray(params, dtype=np.float64), initial)
    return (expectation_batch(amps, n, obs) + 1.0) / 2.0


class SplitClassifier(BaseEstimator, ClassifierMixin):
    """Binary classifier with a split-ansatz readout circuit.

    block_size None means m = N (no splitting). Angle inputs are one feature
    per qubit; amplitude inputs are full statevectors of matching dimension.
    """

    def __init__(self, block_size=None, layers=2, standard_layers=0,
                 block_family="ladder_ry_cx", epochs=100, learning_rate=0.1,
                 batch_size=None, input_mode="angles", seed=0):
        self.block_size = block_size
        self.layers = layers
        self.standard_layers = standard_layers
        self.block_family = block_family
        self.epochs = epochs
        self.learning_rate = learning_rate
        self.batch_size = batch_size
        self.input_mode = input_mode
        self.seed = seed

    # -- construction -----------------------------------------------------

    def _infer_qubits(self, x) -> int:
        if self.input_mode == "angles":
            return x.shape[1]
        width = x.shape[1]
        n = int(width).bit_length() - 1
        if 1 << n != width:
            raise ValueError(f"amplitude width {width} is not a power of two")
        return n

    def _build(self, n: int):
        m = n if self.block_size is None else int(self.block_size)
        spec = SplitSpec(n, m, self.layers, standard_layers=self.standard_layers,
                         block_family=self.block_family)
        circuit = build_cs(spec) if self.standard_layers == 0 else build_ecs(spec)
        paths = None
        if self.input_mode == "angles" and self.standard_layers == 0 and m < n:
            parts = split_observable(one_local_z(n), spec.blocks)
            if parts is not None:
                views = project_blocks(circuit, spec.blocks)
                paths = [_Path(v.qubits, v, p) for v, p in zip(views, parts)]
        return circuit, paths

    # -- forward / backward ----------------------------------------------

    def _initial_amps(self, x, qubits=None):
        if self.input_mode == "angles":
            cols = x if qubits is None else x[:, list(qubits)]
            return product_state_amps(cols)
        return np.ascontiguousarray(x, dtype=np.complex128)

    def _raw_expectations(self, x, params) -> np.ndarray:
        if self.paths_ is None:
            amps = run_circuit_batch(self.circuit_, params, self._initial_amps(x))
            return expectation_batch(amps, self.circuit_.num_qubits,
                                     one_local_z(self.circuit_.num_qubits))
        total = np.zeros(x.shape[0], dtype=np.float64)
        for path in self.paths_:
            amps = run_circuit_batch(path.view.circuit, params[path.view.param_map],
                                     self._initial_amps(x, path.qubits))
            total += expectation_batch(amps, path.view.circuit.num_qubits, path.observable)
        return total

    def _expectation_jacobian(self, x, params) -> np.ndarray:
        """(B, P) matrix of d<O>/d theta_j via the shift rule; every family
        here binds each parameter to exactly one gate."""
        out = np.zeros((x.shape[0], params.size), dtype=np.float64)
        if self.paths_ is None:
            n = self.circuit_.num_qubits
            obs = one_local_z(n)
            initial = self._initial_amps(x)
            for j in range(params.size):
                shifted = np.tile(params, (2, 1))
                shifted[0, j] += np.pi / 2
                shifted[1, j] -= np.pi / 2
                up = expectation_batch(run_circuit_batch(self.circuit_, shifted[0], initial), n, obs)
                dn = expectation_batch(run_circuit_batch(self.circuit_, shifted[1], initial), n, obs)
                out[:, j] = 0.5 * (up - dn)
            return out
        for path in self.paths_:
            local = params[path.view.param_map]
            initial = self._initial_amps(x, path.qubits)
            nq = path.view.circuit.num_qubits
            for k in range(local.size):
                plus = local.copy()
                minus = local.copy()
                plus[k] += np.pi / 2
                minus[k] -= np.pi / 2
                up = expectation_batch(run_circuit_batch(path.view.circuit, plus, initial),
                                       nq, path.observable)
                dn = expectation_batch(run_circuit_batch(path.view.circuit, minus, initial),
                                       nq, path.observable)
                out[:, path.view.param_map[k]] = 0.5 * (up - dn)
        return out

    def _loss_gradient(self, x, y, params) -> np.ndarray:
        raw = self._raw_expectations(x, params)
        yhat = np.clip((raw + 1.0) / 2.0, BCE_EPS, 1.0 - BCE_EPS)
        weight = (yhat - y) / (yhat * (1.0 - yhat)) / 2.0
        jac = self._expectation_jacobian(x, params)
        return (weight[:, None] * jac).mean(axis=0)

    # -- sklearn API ------------------------------------------------------

    def fit(self, X, y, eval_set=None):
        x = np.asarray(X)
        y = np.asarray(y)
        if x.ndim != 2 or x.shape[0] != y.shape[0]:
            raise ValueError(f"bad shapes X {x.shape}, y {y.shape}")
        if not np.isin(y, (0, 1)).all():
            raise ValueError("labels must be 0/1")
        n = self._infer_qubits(x)
        self.circuit_, self.paths_ = self._build(n)
        self.classes_ = np.array([0, 1])
        self.n_features_in_ = x.shape[1]

        rng = rng_for(self.seed, "classify-init", n, self.layers)
        params = rng.uniform(0.0, 2.0 * np.pi, self.circuit_.num_params)
        state = AdamState.init(params.size, lr=self.learning_rate)
        batch = x.shape[0] if self.batch_size is None else int(self.batch_size)
        order_rng = rng_for(self.seed, "classify-batches", n, self.layers)

        self.history_ = []
        for epoch in range(self.epochs):
            if batch >= x.shape[0]:
                grad = self._loss_gradient(x, y, params)
                state, params = adam_step(state, params, grad)
            else:
                order = order_rng.permutation(x.shape[0])
                for lo in range(0, x.shape[0], batch):
                    take = order[lo:lo + batch]
                    grad = self._loss_gradient(x[take], y[take], params)
                    state, params = adam_step(state, params, grad)
            row = {"epoch": epoch}
            row["train_loss"], row["train_accuracy"] = self._evaluate(x, y, params)
            if eval_set is not None:
                row["test_loss"], row["test_accuracy"] = self._evaluate(
                    np.asarray(eval_set[0]), np.asarray(eval_set[1]), params)
            if not np.isfinite(row["train_loss"]):
                raise RuntimeError(f"non-finite loss at epoch {epoch}: {row}")
            self.history_.append(row)
        self.params_ = params
        return self

    def _evaluate(self, x, y, params):
        yhat = (self._raw_expectations(x, params) + 1.0) / 2.0
        loss = bce_loss(y, yhat)
        acc = float(np.mean((yhat >= 0.5).astype(np.int64) == y))
        return loss, 100.0 * acc

    def predict_proba(self, X):
        yhat = (self._raw_expectations(np.asarray(X), self.params_) + 1.0) / 2.0
        return np.column_stack([1.0 - yhat, yhat])

    def predict(self, X):
        # ties at exactly 0.5 resolve to class 1
        return (self.predict_proba(X)[:, 1] >= 0.5).astype(np.int64)

    def best_test_accuracy(self) -> float:
        accs = [row["test_accuracy"] for row in self.history_ if "test_accuracy" in row]
        if not accs:
            raise ValueError("fit was not given an eval_set")
        return max(accs)


@dataclass(frozen=True)
class ClassifyResult:
    seed: int
    best_test_accuracy: float
    final_train_accuracy: float
    epochs_to_full_train: int | None  # first epoch hitting 100%, if any
    history: tuple
    params: np.ndarray


def _fit_one_seed(job) -> ClassifyResult:
    seed, kwargs, inputs, labels, tr, te = job
    clf = SplitClassifier(seed=seed, **kwargs)
    clf.fit(inputs[tr], labels[tr], eval_set=(inputs[te], labels[te]))
    full = next((row["epoch"] for row in clf.history_
                 if row["train_accuracy"] == 100.0), None)
    return ClassifyResult(seed, clf.best_test_accuracy(),
                          clf.history_[-1]["train_accuracy"], full,
                          tuple(clf.history_), clf.params_)


def train_classifier(dataset, block_size=None, layers: int = 2, epochs: int | None = None,
                     seeds=(0,), learning_rate: float = 0.1, batch_size: int | None = None,
                     standard_layers: int = 0, block_family: str = "ladder_ry_cx",
                     workers: int = 1) -> list:
    """Fit one classifier per seed on a generated dataset (classical or
    quantum); epochs default to 100 for angle data and 50 for state data.
    Seeds are independent, so workers > 1 fans them out over processes."""
    from .datasets import ClassicalDataset, QuantumDataset

    if isinstance(dataset, ClassicalDataset):
        inputs = dataset.features
        input_mode = "angles"
        default_epochs = 100
    elif isinstance(dataset, QuantumDataset):
        inputs = dataset.states()
        input_mode = "amplitudes"
        default_epochs = 50
    else:
        raise TypeError(f"unsupported dataset type {type(dataset).__name__}")
    kwargs = dict(block_size=block_size, layers=layers, standard_layers=standard_layers,
                  block_family=block_family,
                  epochs=default_epochs if epochs is None else epochs,
                  learning_rate=learning_rate, batch_size=batch_size,
                  input_mode=input_mode)
    jobs = [(int(s), kwargs, inputs, dataset.labels, dataset.train_idx, dataset.test_idx)
            for s in seeds]
    if workers <= 1 or len(jobs) <= 1:
        return [_fit_one_seed(job) for job in jobs]
    from concurrent.futures import ProcessPoolExecutor
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(_fit_one_seed, jobs))
