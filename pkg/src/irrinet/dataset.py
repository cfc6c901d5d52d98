"""Layered soil-moisture datasets: CSV ingestion, windowing, metrics, synthesis.

The on-disk format is a plain CSV with header
``year,month,day,hour,minute,second,moisture0,moisture1,moisture2,moisture3``
where moisture0 is the top soil layer and moisture3 the deepest. All moisture
values are normalized to [0, 1]; out-of-range values are hard errors, never
clamped, so sensor faults surface at parse time.

Because no physical pots ship with the repo, ``generate_soil`` provides a
layered-bucket simulator (downward-only flow, top evaporation, bottom
drainage) with two named presets whose absorption rates differ.
"""

from __future__ import annotations

from dataclasses import dataclass
from datetime import datetime, timedelta

import numpy as np

from .errors import CsvParseError, DataError, MoistureRangeError, UsageError

CSV_HEADER = "year,month,day,hour,minute,second,moisture0,moisture1,moisture2,moisture3"
N_LAYERS = 4

# One generated step stands for one sensor reporting period.
STEP_SECONDS = 150
GENERATOR_EPOCH = datetime(2021, 1, 1, 0, 0, 0)


@dataclass(frozen=True)
class Sample:
    """One timestamped reading of all four soil layers."""

    timestamp: datetime
    moisture: tuple[float, float, float, float]

    def __post_init__(self):
        if len(self.moisture) != N_LAYERS:
            raise DataError(f"expected {N_LAYERS} moisture values, got {len(self.moisture)}")
        for i, m in enumerate(self.moisture):
            if not (0.0 <= m <= 1.0):
                raise MoistureRangeError(f"moisture{i} = {m!r} outside [0, 1]")


@dataclass(frozen=True)
class Dataset:
    """Chronologically ordered samples from one soil."""

    samples: tuple[Sample, ...]
    soil_label: str = ""

    def __post_init__(self):
        object.__setattr__(self, "samples", tuple(self.samples))
        for i in range(1, len(self.samples)):
            if self.samples[i].timestamp < self.samples[i - 1].timestamp:
                raise DataError(f"timestamps decrease at sample {i}")

    def __len__(self):
        return len(self.samples)


@dataclass(frozen=True)
class WindowedPair:
    """Supervised pair: all four layers now, deepest layer `horizon` steps ahead."""

    features: tuple[float, float, float, float]
    target: float
    origin_index: int


@dataclass(frozen=True)
class MetricsReport:
    sum_abs_error: float
    mse: float
    n: int


@dataclass(frozen=True)
class SoilParams:
    """Layered-bucket dynamics coefficients.

    All rates are per-step fractions in [0, 1], which keeps every layer inside
    [0, 1] before noise; clamping therefore only ever acts on the noise term.
    """

    evaporation_rate: float
    downward_coupling: tuple[float, float, float]
    drainage_rate: float
    noise_std: float
    initial_moisture: tuple[float, float, float, float]

    def __post_init__(self):
        object.__setattr__(self, "downward_coupling", tuple(self.downward_coupling))
        object.__setattr__(self, "initial_moisture", tuple(self.initial_moisture))
        if len(self.downward_coupling) != N_LAYERS - 1:
            raise UsageError("downward_coupling must have 3 entries")
        if len(self.initial_moisture) != N_LAYERS:
            raise UsageError("initial_moisture must have 4 entries")
        for name, r in [("evaporation_rate", self.evaporation_rate),
                        ("drainage_rate", self.drainage_rate),
                        *[(f"downward_coupling[{i}]", c) for i, c in enumerate(self.downward_coupling)]]:
            if not (0.0 <= r <= 1.0):
                raise UsageError(f"{name} = {r!r} outside [0, 1]")
        if self.noise_std < 0:
            raise UsageError("noise_std must be >= 0")
        for i, m in enumerate(self.initial_moisture):
            if not (0.0 <= m <= 1.0):
                raise UsageError(f"initial_moisture[{i}] = {m!r} outside [0, 1]")


# Two soils with deliberately different absorption profiles: water moves down
# the soil1 column quickly, while soil2 holds it near the surface.
SOIL_PRESETS: dict[str, SoilParams] = {
    "soil1": SoilParams(
        evaporation_rate=0.015,
        downward_coupling=(0.10, 0.14, 0.18),
        drainage_rate=0.012,
        noise_std=0.0,
        initial_moisture=(0.65, 0.55, 0.50, 0.45),
    ),
    "soil2": SoilParams(
        evaporation_rate=0.025,
        downward_coupling=(0.05, 0.08, 0.06),
        drainage_rate=0.006,
        noise_std=0.0,
        initial_moisture=(0.65, 0.55, 0.50, 0.45),
    ),
}


def soil_preset(name: str) -> SoilParams:
    try:
        return SOIL_PRESETS[name]
    except KeyError:
        raise UsageError(f"unknown soil preset {name!r}; known: {sorted(SOIL_PRESETS)}") from None


def pulse_schedule(steps: int, every: int, amount: float, start: int = 0) -> list[tuple[int, float]]:
    """Periodic irrigation pulses: `amount` into the top layer every `every` steps."""
    if every < 1:
        raise UsageError("pulse interval must be >= 1")
    return [(s, amount) for s in range(start, steps, every)]


def parse_csv(text: str, soil_label: str = "") -> Dataset:
    """Parse the four-layer moisture CSV format into a Dataset.

    Raises CsvParseError (with the 1-based line number) for malformed rows and
    MoistureRangeError (naming row and column) for out-of-range moisture.
    """
    lines = text.splitlines()
    if not lines or lines[0].strip() != CSV_HEADER:
        raise CsvParseError(f"line 1: expected header {CSV_HEADER!r}")
    samples = []
    for lineno, line in enumerate(lines[1:], start=2):
        if not line.strip():
            continue
        fields = [f.strip() for f in line.split(",")]
        if len(fields) != 10:
            raise CsvParseError(f"line {lineno}: expected 10 fields, got {len(fields)}")
        try:
            y, mo, d, h, mi, s = (int(f) for f in fields[:6])
            ts = datetime(y, mo, d, h, mi, s)
        except ValueError as e:
            raise CsvParseError(f"line {lineno}: bad timestamp field ({e})") from None
        moisture = []
        for col, f in enumerate(fields[6:]):
            try:
                v = float(f)
            except ValueError:
                raise CsvParseError(f"line {lineno}: moisture{col} = {f!r} is not numeric") from None
            if not (0.0 <= v <= 1.0):
                raise MoistureRangeError(f"line {lineno}: moisture{col} = {v!r} outside [0, 1]")
            moisture.append(v)
        samples.append(Sample(ts, tuple(moisture)))
    return Dataset(tuple(samples), soil_label)


def serialize_csv(ds: Dataset) -> str:
    """Inverse of parse_csv; float fields use shortest round-trip formatting."""
    out = [CSV_HEADER]
    for s in ds.samples:
        t = s.timestamp
        out.append(
            f"{t.year},{t.month},{t.day},{t.hour},{t.minute},{t.second},"
            + ",".join(repr(m) for m in s.moisture)
        )
    return "\n".join(out) + "\n"


def make_windows(ds: Dataset, horizon: int = 3) -> list[WindowedPair]:
    """Pair each row's four moistures with the deepest layer `horizon` rows later."""
    if horizon < 0:
        raise UsageError("horizon must be >= 0")
    n = len(ds.samples)
    pairs = []
    for i in range(max(0, n - horizon)):
        pairs.append(WindowedPair(
            features=ds.samples[i].moisture,
            target=ds.samples[i + horizon].moisture[N_LAYERS - 1],
            origin_index=i,
        ))
    return pairs


def chronological_split(pairs: list[WindowedPair], n_train: int, n_test: int):
    """First n_train pairs for training, next n_test for test; never shuffled."""
    if n_train < 0 or n_test < 0:
        raise UsageError("split sizes must be >= 0")
    if n_train + n_test > len(pairs):
        raise DataError(f"requested {n_train + n_test} > {len(pairs)} available pairs")
    return pairs[:n_train], pairs[n_train:n_train + n_test]


def pairs_to_arrays(pairs: list[WindowedPair]) -> tuple[np.ndarray, np.ndarray]:
    """Stack pairs into an (n, 4) feature matrix and an (n,) target vector."""
    X = np.array([p.features for p in pairs], dtype=float).reshape(len(pairs), N_LAYERS)
    y = np.array([p.target for p in pairs], dtype=float)
    return X, y


def step_soil(m: np.ndarray, params: SoilParams, irrigation: float = 0.0,
              noise: np.ndarray | None = None) -> np.ndarray:
    """Advance the layered-bucket state by one step.

    Order: irrigation into layer 0, simultaneous downward transfers
    coupling[i] * max(m_i - m_{i+1}, 0), evaporation from layer 0, drainage
    from layer 3, then additive noise and a final clamp to [0, 1].
    """
    m = np.asarray(m, dtype=float).copy()
    m[0] += irrigation
    diff = np.maximum(m[:-1] - m[1:], 0.0)
    transfer = np.asarray(params.downward_coupling) * diff
    m[:-1] -= transfer
    m[1:] += transfer
    m[0] -= params.evaporation_rate * m[0]
    m[-1] -= params.drainage_rate * m[-1]
    if noise is not None:
        m += noise
    np.clip(m, 0.0, 1.0, out=m)
    return m


def generate_soil(params: SoilParams, steps: int,
                  irrigation_schedule: list[tuple[int, float]] | None = None,
                  seed: int = 0, soil_label: str = "synthetic") -> Dataset:
    """Simulate `steps` rows of the layered-bucket model.

    Row 0 is exactly initial_moisture; the transition from row t to row t+1
    consumes irrigation scheduled at step t. Deterministic for fixed
    (params, schedule, seed), and independent of seed when noise_std == 0.
    """
    if steps < 1:
        raise UsageError("steps must be >= 1")
    schedule: dict[int, float] = {}
    for step, amount in irrigation_schedule or []:
        schedule[step] = schedule.get(step, 0.0) + amount
    rng = np.random.default_rng(seed) if params.noise_std > 0 else None
    m = np.asarray(params.initial_moisture, dtype=float)
    samples = [Sample(GENERATOR_EPOCH, tuple(float(v) for v in m))]
    for t in range(steps - 1):
        noise = rng.normal(0.0, params.noise_std, N_LAYERS) if rng is not None else None
        m = step_soil(m, params, schedule.get(t, 0.0), noise)
        ts = GENERATOR_EPOCH + timedelta(seconds=STEP_SECONDS * (t + 1))
        samples.append(Sample(ts, tuple(float(v) for v in m)))
    return Dataset(tuple(samples), soil_label)


def evaluate_metrics(targets, predictions) -> MetricsReport:
    """Sum of absolute errors and mean squared error over an evaluation set."""
    y = np.asarray(targets, dtype=float)
    yhat = np.asarray(predictions, dtype=float)
    if y.shape != yhat.shape:
        raise UsageError(f"length mismatch: {y.shape} targets vs {yhat.shape} predictions")
    if y.size == 0:
        raise UsageError("cannot evaluate empty vectors")
    err = y - yhat
    return MetricsReport(
        sum_abs_error=float(np.sum(np.abs(err))),
        mse=float(np.mean(err ** 2)),
        n=int(y.size),
    )
