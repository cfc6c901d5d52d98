"""Linear regression baseline f(x) = w . x + b trained like the network.

Kept deliberately minimal: no kernel, no epsilon tube, no margin
hyperparameters. The objective is mean absolute error minimized by
mini-batch Adam from a zero initialization, which makes the baseline's
only randomness the per-epoch shuffle.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .dataset import WindowedPair, evaluate_metrics, pairs_to_arrays
from .errors import UsageError
from .optim import AdamConfig, AdamState, EpochStats, TrainHistory, adam_step

DEFAULT_BATCH_SIZE = 32


@dataclass
class SvrModel:
    w: np.ndarray  # (input_dim,)
    b: float

    def __post_init__(self):
        self.w = np.asarray(self.w, dtype=float)
        self.b = float(self.b)
        if self.w.ndim != 1:
            raise UsageError("w must be a 1-d vector")

    def copy(self) -> "SvrModel":
        return SvrModel(self.w.copy(), self.b)


def svr_predict(model: SvrModel, x) -> float:
    """w . x + b, unclamped."""
    x = np.asarray(x, dtype=float)
    if x.shape != model.w.shape:
        raise UsageError(f"expected input of shape {model.w.shape}, got {x.shape}")
    return float(model.w @ x + model.b)


def svr_predict_batch(model: SvrModel, X: np.ndarray) -> np.ndarray:
    return np.asarray(X, dtype=float) @ model.w + model.b


def svr_train(pairs: list[WindowedPair], epochs: int, adam: AdamConfig,
              seed: int, batch_size: int = DEFAULT_BATCH_SIZE) -> tuple[SvrModel, TrainHistory]:
    """Minimize mean absolute error by mini-batch Adam from w=0, b=0.

    Subgradient of |r| at r=0 is taken as 0. Deterministic for a fixed seed;
    epochs=0 returns the zero model and an empty history.
    """
    if not pairs:
        raise UsageError("training set is empty")
    if epochs < 0:
        raise UsageError("epochs must be >= 0")
    X, y = pairs_to_arrays(pairs)
    n, dim = X.shape

    rng = np.random.default_rng(seed)
    arrays = [np.zeros(dim), np.zeros(1)]
    state = AdamState.zeros_like(arrays)
    history = TrainHistory()
    for epoch in range(1, epochs + 1):
        order = rng.permutation(n)
        for lo in range(0, n, batch_size):
            idx = order[lo:lo + batch_size]
            residual = X[idx] @ arrays[0] + arrays[1][0] - y[idx]
            sgn = np.sign(residual)
            grads = [sgn @ X[idx] / len(idx), np.array([sgn.mean()])]
            arrays, state = adam_step(arrays, grads, state, adam)
        train = evaluate_metrics(y, X @ arrays[0] + arrays[1][0])
        history.epochs.append(EpochStats(epoch, train.sum_abs_error, train.mse))
    return SvrModel(arrays[0], float(arrays[1][0])), history
