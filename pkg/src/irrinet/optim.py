"""Adam optimizer over lists of parameter arrays, plus per-epoch training records.

The update is the standard bias-corrected form; trainers represent their
parameters as a flat list of float64 arrays so one optimizer serves both the
linear baseline and the network.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import UsageError


@dataclass(frozen=True)
class AdamConfig:
    learning_rate: float = 0.001
    beta1: float = 0.9
    beta2: float = 0.999
    epsilon: float = 1e-8

    def __post_init__(self):
        if not (0.0 <= self.beta1 < 1.0 and 0.0 <= self.beta2 < 1.0):
            raise UsageError("beta1 and beta2 must lie in [0, 1)")
        if self.epsilon <= 0:
            raise UsageError("epsilon must be > 0")


@dataclass
class AdamState:
    """First/second moment accumulators shaped like the parameters, and step count."""

    m: list[np.ndarray]
    v: list[np.ndarray]
    t: int = 0

    @classmethod
    def zeros_like(cls, params: list[np.ndarray]) -> "AdamState":
        return cls(m=[np.zeros_like(p) for p in params],
                   v=[np.zeros_like(p) for p in params])


def adam_step(params: list[np.ndarray], grads: list[np.ndarray],
              state: AdamState, config: AdamConfig) -> tuple[list[np.ndarray], AdamState]:
    """One bias-corrected Adam update; returns fresh arrays, inputs untouched."""
    if len(params) != len(grads) or len(params) != len(state.m):
        raise UsageError("params, grads and state must have matching structure")
    t = state.t + 1
    new_params, new_m, new_v = [], [], []
    for p, g, m, v in zip(params, grads, state.m, state.v):
        m1 = config.beta1 * m + (1.0 - config.beta1) * g
        v1 = config.beta2 * v + (1.0 - config.beta2) * g * g
        m_hat = m1 / (1.0 - config.beta1 ** t)
        v_hat = v1 / (1.0 - config.beta2 ** t)
        new_params.append(p - config.learning_rate * m_hat / (np.sqrt(v_hat) + config.epsilon))
        new_m.append(m1)
        new_v.append(v1)
    return new_params, AdamState(m=new_m, v=new_v, t=t)


@dataclass(frozen=True)
class EpochStats:
    """Metrics recorded after one completed epoch (dropout disabled)."""

    epoch: int
    train_sum_abs_error: float
    train_mse: float
    eval_sum_abs_error: float | None = None
    eval_mse: float | None = None


@dataclass
class TrainHistory:
    epochs: list[EpochStats] = field(default_factory=list)

    def __len__(self):
        return len(self.epochs)

    def __iter__(self):
        return iter(self.epochs)

    def __getitem__(self, i):
        return self.epochs[i]
