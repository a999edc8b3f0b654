"""ADAM and SPSA parameter-update rules.

Both steppers are pure: they return a fresh state instead of mutating, so
trajectories can be replayed and checkpointed trivially.
"""
from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from ._seeding import rng_for


@dataclass(frozen=True)
class AdamState:
    lr: float
    beta1: float
    beta2: float
    eps: float
    t: int
    m: np.ndarray
    v: np.ndarray

    @classmethod
    def init(cls, num_params: int, lr: float = 0.1, beta1: float = 0.9,
             beta2: float = 0.999, eps: float = 1e-8) -> "AdamState":
        if num_params < 1:
            raise ValueError("num_params must be >= 1")
        return cls(lr, beta1, beta2, eps, 0,
                   np.zeros(num_params), np.zeros(num_params))


def adam_step(state: AdamState, params, grad):
    """One bias-corrected ADAM update; returns (new state, new params)."""
    params = np.asarray(params, dtype=np.float64)
    grad = np.asarray(grad, dtype=np.float64)
    if grad.shape != state.m.shape or params.shape != state.m.shape:
        raise ValueError(f"shape mismatch: params {params.shape}, grad {grad.shape}, "
                         f"state {state.m.shape}")
    t = state.t + 1
    m = state.beta1 * state.m + (1 - state.beta1) * grad
    v = state.beta2 * state.v + (1 - state.beta2) * grad ** 2
    m_hat = m / (1 - state.beta1 ** t)
    v_hat = v / (1 - state.beta2 ** t)
    new_params = params - state.lr * m_hat / (np.sqrt(v_hat) + state.eps)
    return replace(state, t=t, m=m, v=v), new_params


@dataclass(frozen=True)
class SpsaState:
    """Iteration counter plus the standard gain schedules
    a_k = a/(k+1+A)^alpha and c_k = c/(k+1)^gamma."""

    k: int
    a: float
    c: float
    big_a: float
    alpha: float
    gamma: float
    seed: int
    last_evals: tuple | None = None

    @classmethod
    def init(cls, seed: int, iterations: int | None = None, a: float = 0.2,
             c: float = 0.1, big_a: float | None = None, alpha: float = 0.602,
             gamma: float = 0.101) -> "SpsaState":
        if big_a is None:
            big_a = 0.1 * iterations if iterations else 0.0
        return cls(0, a, c, float(big_a), alpha, gamma, seed)

    def gain_a(self) -> float:
        return self.a / (self.k + 1 + self.big_a) ** self.alpha

    def gain_c(self) -> float:
        return self.c / (self.k + 1) ** self.gamma


def spsa_step(state: SpsaState, params, cost_fn):
    """One simultaneous-perturbation step using exactly two cost evaluations.

    The two evaluations are stored on the returned state (`last_evals`) so
    drivers can log an energy trajectory without extra circuit runs.
    """
    params = np.asarray(params, dtype=np.float64)
    rng = rng_for(state.seed, "spsa", state.k)
    delta = rng.integers(0, 2, size=params.shape[0]) * 2.0 - 1.0
    ck = state.gain_c()
    y_plus = float(cost_fn(params + ck * delta))
    y_minus = float(cost_fn(params - ck * delta))
    ghat = (y_plus - y_minus) / (2.0 * ck) / delta
    new_params = params - state.gain_a() * ghat
    new_state = replace(state, k=state.k + 1, last_evals=(y_plus, y_minus))
    return new_state, new_params
