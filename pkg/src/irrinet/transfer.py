"""Cross-soil adaptation experiments: fine-tuning and sample-efficiency sweeps.

Fine-tuning continues training of a pre-trained network on data from a new
soil, all layers updated (the network is tiny; freezing buys nothing). The
sweep answers "how much new-soil data would a from-scratch model need to
match the pre-trained one?" by training fresh models on growing prefixes of
a sample pool.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .ann import AdamConfig, AnnParams, DropoutConfig, ann_init, ann_predict, ann_train
from .dataset import MetricsReport, WindowedPair, evaluate_metrics, pairs_to_arrays
from .errors import UsageError
from .optim import TrainHistory

DEFAULT_MSE_THRESHOLD = 0.05


@dataclass(frozen=True)
class ConvergenceReport:
    """Convergence speed as per-epoch differences of the training loss."""

    deltas: tuple[float, ...]            # train loss[e] - train loss[e-1]
    epochs_to_threshold: int | None      # 0 = already below before training; None = never
    starting_eval: MetricsReport         # eval metrics before any epoch
    threshold: float

    def to_tsv(self) -> str:
        lines = ["epoch\tloss_delta"]
        lines += [f"{e + 1}\t{d!r}" for e, d in enumerate(self.deltas)]
        reached = "never" if self.epochs_to_threshold is None else str(self.epochs_to_threshold)
        lines.append(f"# starting_eval_sum_abs_error\t{self.starting_eval.sum_abs_error!r}")
        lines.append(f"# starting_eval_mse\t{self.starting_eval.mse!r}")
        lines.append(f"# epochs_to_mse_{self.threshold}\t{reached}")
        return "\n".join(lines) + "\n"


@dataclass(frozen=True)
class SweepRow:
    training_size: int
    test_sum_abs_error: float
    test_mse: float


@dataclass(frozen=True)
class SweepReport:
    rows: tuple[SweepRow, ...]
    baseline: float
    crossing_metric: str
    crossing_size: int | None            # None = baseline never matched

    def to_tsv(self) -> str:
        lines = ["training_size\ttest_sum_abs_error\ttest_mse"]
        lines += [f"{r.training_size}\t{r.test_sum_abs_error!r}\t{r.test_mse!r}" for r in self.rows]
        crossing = "not_reached" if self.crossing_size is None else str(self.crossing_size)
        lines.append(f"# baseline_{self.crossing_metric}\t{self.baseline!r}")
        lines.append(f"# crossing_size\t{crossing}")
        return "\n".join(lines) + "\n"


@dataclass(frozen=True)
class TrainerConfig:
    """How sweep rows (and other fresh models) are trained."""

    epochs: int = 20
    dropout: DropoutConfig = field(default_factory=DropoutConfig)
    adam: AdamConfig = field(default_factory=AdamConfig)
    base_seed: int = 0
    hidden_dim: int = 4
    batch_size: int = 32


def derive_seed(base_seed: int, training_size: int) -> int:
    """Deterministic per-row seed so any sweep row can be reproduced alone."""
    return int(np.random.SeedSequence([base_seed, training_size]).generate_state(1)[0])


def evaluate_on(params: AnnParams, pairs: list[WindowedPair]) -> MetricsReport:
    X, y = pairs_to_arrays(pairs)
    return evaluate_metrics(y, ann_predict(params, X))


def convergence_report(history: TrainHistory, starting_eval: MetricsReport,
                       threshold: float = DEFAULT_MSE_THRESHOLD) -> ConvergenceReport:
    """Summarize a training history against an eval-MSE threshold."""
    losses = [e.train_sum_abs_error for e in history]
    deltas = tuple(losses[i] - losses[i - 1] for i in range(1, len(losses)))
    reached: int | None = None
    if starting_eval.mse <= threshold:
        reached = 0
    else:
        for e in history:
            if e.eval_mse is not None and e.eval_mse <= threshold:
                reached = e.epoch
                break
    return ConvergenceReport(deltas, reached, starting_eval, threshold)


def fine_tune(pretrained: AnnParams, new_pairs: list[WindowedPair], epochs: int,
              dropout: DropoutConfig, adam: AdamConfig, seed: int,
              eval_set: list[WindowedPair],
              threshold: float = DEFAULT_MSE_THRESHOLD
              ) -> tuple[AnnParams, TrainHistory, ConvergenceReport]:
    """Continue training from pre-trained weights; identical mechanics to ann_train.

    The report records the pre-trained model's eval metrics before any epoch,
    so the starting-point advantage over a fresh model is explicit.
    """
    if not new_pairs:
        raise UsageError("training set is empty")
    if len(new_pairs[0].features) != pretrained.input_dim:
        raise UsageError(f"model expects {pretrained.input_dim} inputs, "
                         f"pairs have {len(new_pairs[0].features)}")
    starting_eval = evaluate_on(pretrained, eval_set)
    tuned, history = ann_train(pretrained.copy(), new_pairs, epochs, dropout, adam,
                               seed, eval_set=eval_set)
    return tuned, history, convergence_report(history, starting_eval, threshold)


def sample_efficiency_sweep(pretrained_baseline_error: float, pool: list[WindowedPair],
                            test_set: list[WindowedPair], step: int = 50,
                            max_size: int | None = None,
                            trainer: TrainerConfig = TrainerConfig(),
                            crossing_metric: str = "sum_abs_error") -> SweepReport:
    """Train fresh models on growing prefixes of `pool`; find where they match the baseline.

    Sizes run step, 2*step, ... up to min(max_size, len(pool)). Each row uses
    a seed derived from (base_seed, size) so rows are independently
    reproducible; crossing_size is the first size whose test error is <= the
    pre-trained baseline on the shared test set.
    """
    if step < 1:
        raise UsageError("step must be >= 1")
    if not pool:
        raise UsageError("sample pool is empty")
    if len(pool) < step:
        raise UsageError(f"pool of {len(pool)} smaller than step {step}")
    if crossing_metric not in ("sum_abs_error", "mse"):
        raise UsageError(f"unknown crossing metric {crossing_metric!r}")
    limit = min(max_size if max_size is not None else len(pool), len(pool))
    input_dim = len(pool[0].features)

    rows: list[SweepRow] = []
    crossing: int | None = None
    size = step
    while size <= limit:
        seed = derive_seed(trainer.base_seed, size)
        start = ann_init(input_dim, trainer.hidden_dim, seed)
        model, _ = ann_train(start, pool[:size], trainer.epochs, trainer.dropout,
                             trainer.adam, seed, batch_size=trainer.batch_size)
        report = evaluate_on(model, test_set)
        rows.append(SweepRow(size, report.sum_abs_error, report.mse))
        err = report.sum_abs_error if crossing_metric == "sum_abs_error" else report.mse
        if crossing is None and err <= pretrained_baseline_error:
            crossing = size
        size += step
    return SweepReport(tuple(rows), pretrained_baseline_error, crossing_metric, crossing)
