"""Single-hidden-layer ReLU network with hand-written backpropagation.

The network maps the four current layer moistures to the deepest layer's
moisture a few steps ahead:

    yhat = w0 + sum_j wj * relu(b_j + W_j . x)

Training minimizes mean absolute error with mini-batch Adam and inverted
dropout on the hidden layer (kept units scaled by 1/(1-rate) at train time,
so inference is a plain forward pass). Everything is float64 numpy and
deterministic for a fixed seed.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .dataset import WindowedPair, evaluate_metrics, pairs_to_arrays
from .errors import UsageError
from .optim import AdamConfig, AdamState, EpochStats, TrainHistory, adam_step

__all__ = [
    "AnnParams", "DropoutConfig", "AdamConfig", "AdamState", "adam_step",
    "ann_init", "ann_forward", "ann_predict", "ann_loss_grad", "ann_train",
]

DEFAULT_BATCH_SIZE = 32


@dataclass
class AnnParams:
    """Weights of the 4-q-1 network (q defaults to 4)."""

    hidden_weights: np.ndarray   # (q, input_dim)
    hidden_biases: np.ndarray    # (q,)
    output_weights: np.ndarray   # (q,)
    output_bias: float

    def __post_init__(self):
        self.hidden_weights = np.asarray(self.hidden_weights, dtype=float)
        self.hidden_biases = np.asarray(self.hidden_biases, dtype=float)
        self.output_weights = np.asarray(self.output_weights, dtype=float)
        self.output_bias = float(self.output_bias)
        if self.hidden_weights.ndim != 2:
            raise UsageError("hidden_weights must be a 2-d matrix")
        q = self.hidden_weights.shape[0]
        if self.hidden_biases.shape != (q,) or self.output_weights.shape != (q,):
            raise UsageError("inconsistent parameter shapes")

    @property
    def input_dim(self) -> int:
        return self.hidden_weights.shape[1]

    @property
    def hidden_dim(self) -> int:
        return self.hidden_weights.shape[0]

    @property
    def n_parameters(self) -> int:
        return self.hidden_weights.size + self.hidden_biases.size + self.output_weights.size + 1

    def copy(self) -> "AnnParams":
        return AnnParams(self.hidden_weights.copy(), self.hidden_biases.copy(),
                         self.output_weights.copy(), self.output_bias)

    def to_arrays(self) -> list[np.ndarray]:
        return [self.hidden_weights, self.hidden_biases,
                self.output_weights, np.array([self.output_bias])]

    @classmethod
    def from_arrays(cls, arrays: list[np.ndarray]) -> "AnnParams":
        hw, hb, ow, ob = arrays
        return cls(hw, hb, ow, float(ob[0]))


@dataclass(frozen=True)
class DropoutConfig:
    """Probability that a hidden unit is dropped for one training example."""

    rate: float = 0.2

    def __post_init__(self):
        if not (0.0 <= self.rate < 1.0):
            raise UsageError("dropout rate must lie in [0, 1)")

    def sample_masks(self, rng: np.random.Generator, n: int, hidden_dim: int) -> np.ndarray:
        """(n, hidden_dim) inverted-dropout masks: 0 where dropped, 1/(1-rate) where kept."""
        if self.rate == 0.0:
            return np.ones((n, hidden_dim))
        keep = rng.random((n, hidden_dim)) >= self.rate
        return keep / (1.0 - self.rate)

    def sample_mask(self, rng: np.random.Generator, hidden_dim: int) -> np.ndarray:
        return self.sample_masks(rng, 1, hidden_dim)[0]


def ann_init(input_dim: int, hidden_dim: int, seed: int) -> AnnParams:
    """Glorot-uniform weights, zero biases, deterministic per seed."""
    if input_dim < 1 or hidden_dim < 1:
        raise UsageError("dimensions must be >= 1")
    rng = np.random.default_rng(seed)
    lim_h = np.sqrt(6.0 / (input_dim + hidden_dim))
    lim_o = np.sqrt(6.0 / (hidden_dim + 1))
    return AnnParams(
        hidden_weights=rng.uniform(-lim_h, lim_h, (hidden_dim, input_dim)),
        hidden_biases=np.zeros(hidden_dim),
        output_weights=rng.uniform(-lim_o, lim_o, hidden_dim),
        output_bias=0.0,
    )


def ann_forward(params: AnnParams, x, mask: np.ndarray | None = None) -> tuple[float, np.ndarray]:
    """Forward pass; returns (prediction, post-mask hidden activations)."""
    x = np.asarray(x, dtype=float)
    if x.shape != (params.input_dim,):
        raise UsageError(f"expected input of shape ({params.input_dim},), got {x.shape}")
    pre = params.hidden_biases + params.hidden_weights @ x
    hidden = np.maximum(pre, 0.0)
    if mask is not None:
        if np.shape(mask) != (params.hidden_dim,):
            raise UsageError("mask length must equal hidden_dim")
        hidden = hidden * mask
    return float(params.output_bias + params.output_weights @ hidden), hidden


def ann_predict(params: AnnParams, X: np.ndarray) -> np.ndarray:
    """Vectorized no-dropout forward pass over an (n, input_dim) matrix."""
    X = np.asarray(X, dtype=float)
    hidden = np.maximum(X @ params.hidden_weights.T + params.hidden_biases, 0.0)
    return hidden @ params.output_weights + params.output_bias


def ann_loss_grad(params: AnnParams, pair: WindowedPair,
                  mask: np.ndarray | None = None) -> tuple[float, AnnParams]:
    """Absolute-error loss and its exact subgradient for one example.

    Subgradient conventions: sign(0) = 0 at zero residual, ReLU'(0) = 0.
    """
    x = np.asarray(pair.features, dtype=float)
    pre = params.hidden_biases + params.hidden_weights @ x
    hidden = np.maximum(pre, 0.0)
    if mask is not None:
        hidden = hidden * mask
    yhat = params.output_bias + params.output_weights @ hidden
    residual = yhat - pair.target
    dloss = np.sign(residual)
    dpre = dloss * params.output_weights * (pre > 0.0)
    if mask is not None:
        dpre = dpre * mask
    return float(abs(residual)), AnnParams(
        hidden_weights=np.outer(dpre, x),
        hidden_biases=dpre,
        output_weights=dloss * hidden,
        output_bias=float(dloss),
    )


def _batch_loss_grads(params: list[np.ndarray], X: np.ndarray, y: np.ndarray,
                      masks: np.ndarray) -> tuple[float, list[np.ndarray]]:
    """Mean loss and mean gradient over a batch; equals averaging ann_loss_grad."""
    hw, hb, ow, ob = params
    pre = X @ hw.T + hb                       # (B, q)
    hidden = np.maximum(pre, 0.0) * masks
    yhat = hidden @ ow + ob[0]
    residual = yhat - y
    sgn = np.sign(residual)
    dpre = sgn[:, None] * ow * masks * (pre > 0.0)
    n = X.shape[0]
    grads = [
        dpre.T @ X / n,
        dpre.mean(axis=0),
        (sgn[:, None] * hidden).mean(axis=0),
        np.array([sgn.mean()]),
    ]
    return float(np.mean(np.abs(residual))), grads


def _epoch_stats(epoch: int, arrays: list[np.ndarray], X: np.ndarray, y: np.ndarray,
                 eval_xy: tuple[np.ndarray, np.ndarray] | None) -> EpochStats:
    p = AnnParams.from_arrays(arrays)
    train = evaluate_metrics(y, ann_predict(p, X))
    if eval_xy is None:
        return EpochStats(epoch, train.sum_abs_error, train.mse)
    ev = evaluate_metrics(eval_xy[1], ann_predict(p, eval_xy[0]))
    return EpochStats(epoch, train.sum_abs_error, train.mse, ev.sum_abs_error, ev.mse)


def ann_train(start: AnnParams, pairs: list[WindowedPair], epochs: int,
              dropout: DropoutConfig, adam: AdamConfig, seed: int,
              eval_set: list[WindowedPair] | None = None,
              batch_size: int = DEFAULT_BATCH_SIZE) -> tuple[AnnParams, TrainHistory]:
    """Mini-batch Adam on absolute error, fresh dropout masks per example per epoch.

    History metrics are computed with dropout disabled after each epoch.
    epochs=0 returns a copy of `start` and an empty history.
    """
    if not pairs:
        raise UsageError("training set is empty")
    if epochs < 0:
        raise UsageError("epochs must be >= 0")
    X, y = pairs_to_arrays(pairs)
    if X.shape[1] != start.input_dim:
        raise UsageError(f"model expects {start.input_dim} inputs, pairs have {X.shape[1]}")
    eval_xy = pairs_to_arrays(eval_set) if eval_set else None

    rng = np.random.default_rng(seed)
    arrays = [a.copy() for a in start.to_arrays()]
    state = AdamState.zeros_like(arrays)
    history = TrainHistory()
    n = len(pairs)
    for epoch in range(1, epochs + 1):
        order = rng.permutation(n)
        for lo in range(0, n, batch_size):
            idx = order[lo:lo + batch_size]
            masks = dropout.sample_masks(rng, len(idx), start.hidden_dim)
            _, grads = _batch_loss_grads(arrays, X[idx], y[idx], masks)
            arrays, state = adam_step(arrays, grads, state, adam)
        history.epochs.append(_epoch_stats(epoch, arrays, X, y, eval_xy))
    return AnnParams.from_arrays(arrays), history
