"""Online model extension for a new climate variable, with blended handover.

A trained 4-input source network is grown into a 5-input, 5-hidden target
copy whose new connections start at exactly zero, so the target's initial
behavior is identical to the source's (no disruption on deployment). Both
models then train online on each observation while a two-weight mixer
y_ans = alpha*y1 + beta*y2 adapts on the unit simplex; once beta exceeds the
handover threshold the target becomes the main model.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .ann import AnnParams, ann_forward, ann_loss_grad
from .dataset import WindowedPair
from .errors import UsageError


@dataclass(frozen=True)
class ExtendedSample:
    """Four base moistures, one new normalized variable, and the observed target."""

    base_features: tuple[float, float, float, float]
    new_feature: float
    target: float


@dataclass(frozen=True)
class BlendState:
    source: AnnParams
    target: AnnParams
    alpha: float = 0.999
    beta: float = 0.001
    blend_learning_rate: float = 0.05
    model_learning_rate: float = 0.01
    handover_threshold: float = 0.9
    handed_over: bool = False
    handover_step: int | None = None


@dataclass(frozen=True)
class BlendTraceRow:
    step: int
    alpha: float
    beta: float
    y_ans: float
    observed: float
    handed_over: bool


def extend_model(source: AnnParams, seed: int = 0) -> AnnParams:
    """Grow the network by one input and one hidden unit, new paths all zero.

    Zero initialization (rather than small random; `seed` is accepted for
    interface stability but unused) guarantees the grown model computes
    exactly the source function until the new connections receive gradient.
    """
    q, d = source.hidden_dim, source.input_dim
    hw = np.zeros((q + 1, d + 1))
    hw[:q, :d] = source.hidden_weights
    hb = np.zeros(q + 1)
    hb[:q] = source.hidden_biases
    ow = np.zeros(q + 1)
    ow[:q] = source.output_weights
    return AnnParams(hw, hb, ow, source.output_bias)


def _extended_features(sample: ExtendedSample) -> tuple[float, ...]:
    return (*sample.base_features, sample.new_feature)


def blend_predict(state: BlendState, sample: ExtendedSample) -> tuple[float, float, float]:
    """Returns (y_ans, y1, y2): mixed, source-only, and target-only predictions."""
    y1, _ = ann_forward(state.source, sample.base_features)
    y2, _ = ann_forward(state.target, _extended_features(sample))
    return state.alpha * y1 + state.beta * y2, y1, y2


def _sgd_step(params: AnnParams, features: tuple[float, ...], observed: float,
              lr: float) -> AnnParams:
    _, g = ann_loss_grad(params, WindowedPair(features, observed, -1))
    return AnnParams(
        params.hidden_weights - lr * g.hidden_weights,
        params.hidden_biases - lr * g.hidden_biases,
        params.output_weights - lr * g.output_weights,
        params.output_bias - lr * g.output_bias,
    )


def _project_simplex(alpha: float, beta: float) -> tuple[float, float]:
    # Orthogonal projection onto the line alpha + beta = 1, then the clip
    # pairs the excess so the sum stays exactly 1.
    shift = (alpha + beta - 1.0) / 2.0
    alpha -= shift
    beta -= shift
    if alpha < 0.0:
        return 0.0, 1.0
    if beta < 0.0:
        return 1.0, 0.0
    return alpha, beta


def blend_update(state: BlendState, sample: ExtendedSample, observed_y: float) -> BlendState:
    """One online update: source step, target step, then the mixer step.

    The mixer takes one gradient step on (alpha*y1 + beta*y2 - observed)^2
    using the post-update model predictions, then projects (alpha, beta) back
    onto the unit simplex.
    """
    if state.handed_over:
        raise UsageError("blend_update called after handover")
    source = _sgd_step(state.source, sample.base_features, observed_y,
                       state.model_learning_rate)
    target = _sgd_step(state.target, _extended_features(sample), observed_y,
                       state.model_learning_rate)
    y1, _ = ann_forward(source, sample.base_features)
    y2, _ = ann_forward(target, _extended_features(sample))
    err = state.alpha * y1 + state.beta * y2 - observed_y
    alpha = state.alpha - state.blend_learning_rate * 2.0 * err * y1
    beta = state.beta - state.blend_learning_rate * 2.0 * err * y2
    alpha, beta = _project_simplex(alpha, beta)
    return replace(state, source=source, target=target, alpha=alpha, beta=beta)


def run_extension(state: BlendState, stream, budget: int
                  ) -> tuple[BlendState, list[BlendTraceRow]]:
    """Feed samples through blend_update until handover or budget exhaustion.

    Each trace row records the state and mixed prediction *before* that
    step's update, so the first row carries the initial mixing weights. On
    beta crossing the threshold the state is marked handed over at that step,
    adaptation stops, and one terminal row with the post-handover state is
    appended; the source model is kept as-is for audit.
    """
    if budget < 1:
        raise UsageError("budget must be >= 1")
    trace: list[BlendTraceRow] = []
    for step, sample in enumerate(stream):
        if step >= budget or state.handed_over:
            break
        y_ans, _, _ = blend_predict(state, sample)
        trace.append(BlendTraceRow(step, state.alpha, state.beta, y_ans,
                                   sample.target, False))
        state = blend_update(state, sample, sample.target)
        if state.beta > state.handover_threshold:
            state = replace(state, handed_over=True, handover_step=step)
            y_ans, _, _ = blend_predict(state, sample)
            trace.append(BlendTraceRow(step + 1, state.alpha, state.beta, y_ans,
                                       sample.target, True))
    return state, trace


def trace_to_tsv(trace: list[BlendTraceRow]) -> str:
    lines = ["step\talpha\tbeta\ty_ans\tobserved\thanded_over"]
    for r in trace:
        lines.append(f"{r.step}\t{r.alpha!r}\t{r.beta!r}\t{r.y_ans!r}\t"
                     f"{r.observed!r}\t{int(r.handed_over)}")
    return "\n".join(lines) + "\n"
