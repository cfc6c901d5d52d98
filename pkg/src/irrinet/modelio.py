"""Plain-text model files shared by the linear baseline and the network.

Layout (UTF-8, one record per file):

    irrinet-model 1
    kind ann                      # or: svr
    input_dim 4
    hidden_dim 4                  # ann only
    hidden_weights v v v ...      # row-major, 17 significant digits
    hidden_biases v ...
    output_weights v ...
    output_bias v
    meta <key> <value>            # zero or more, sorted by key
    end

The trailing ``end`` line makes truncation detectable; loading a saved model
reproduces its parameters bit-exactly.
"""

from __future__ import annotations

import numpy as np

from .ann import AnnParams, ann_predict
from .errors import ModelFormatError, UsageError
from .svr import SvrModel, svr_predict_batch

MAGIC = "irrinet-model 1"


def _fmt(values) -> str:
    return " ".join(f"{float(v):.17g}" for v in np.asarray(values, dtype=float).ravel())


def save_model(model: SvrModel | AnnParams, metadata: dict[str, str] | None = None) -> bytes:
    lines = [MAGIC]
    if isinstance(model, SvrModel):
        lines += [
            "kind svr",
            f"input_dim {model.w.size}",
            f"w {_fmt(model.w)}",
            f"b {_fmt([model.b])}",
        ]
    elif isinstance(model, AnnParams):
        lines += [
            "kind ann",
            f"input_dim {model.input_dim}",
            f"hidden_dim {model.hidden_dim}",
            f"hidden_weights {_fmt(model.hidden_weights)}",
            f"hidden_biases {_fmt(model.hidden_biases)}",
            f"output_weights {_fmt(model.output_weights)}",
            f"output_bias {_fmt([model.output_bias])}",
        ]
    else:
        raise UsageError(f"cannot save model of type {type(model).__name__}")
    for key in sorted(metadata or {}):
        value = str((metadata or {})[key])
        if any(c.isspace() for c in key) or "\n" in value:
            raise UsageError(f"invalid metadata entry {key!r}")
        lines.append(f"meta {key} {value}")
    lines.append("end")
    return ("\n".join(lines) + "\n").encode("utf-8")


class _Reader:
    def __init__(self, data: bytes):
        try:
            text = data.decode("utf-8")
        except UnicodeDecodeError as e:
            raise ModelFormatError(f"not a text model file: {e}") from None
        self.lines = text.splitlines()
        self.pos = 0

    def next(self, expect_key: str | None = None) -> str:
        if self.pos >= len(self.lines):
            raise ModelFormatError("truncated model file")
        line = self.lines[self.pos]
        self.pos += 1
        if expect_key is not None and not line.startswith(expect_key + " "):
            raise ModelFormatError(f"expected {expect_key!r} line, got {line!r}")
        return line

    def floats(self, key: str, count: int) -> np.ndarray:
        body = self.next(key)[len(key) + 1:]
        parts = body.split()
        if len(parts) != count:
            raise ModelFormatError(f"{key}: expected {count} values, got {len(parts)}")
        try:
            return np.array([float(p) for p in parts])
        except ValueError as e:
            raise ModelFormatError(f"{key}: {e}") from None

    def integer(self, key: str) -> int:
        body = self.next(key)[len(key) + 1:]
        try:
            return int(body)
        except ValueError:
            raise ModelFormatError(f"{key}: {body!r} is not an integer") from None


def read_model_record(data: bytes) -> tuple[SvrModel | AnnParams, dict[str, str]]:
    """Parse a model file into (model, metadata)."""
    r = _Reader(data)
    if r.next() != MAGIC:
        raise ModelFormatError(f"missing magic line {MAGIC!r}")
    kind = r.next("kind").split(" ", 1)[1]
    if kind == "svr":
        dim = r.integer("input_dim")
        model: SvrModel | AnnParams = SvrModel(r.floats("w", dim), float(r.floats("b", 1)[0]))
    elif kind == "ann":
        dim = r.integer("input_dim")
        q = r.integer("hidden_dim")
        model = AnnParams(
            hidden_weights=r.floats("hidden_weights", q * dim).reshape(q, dim),
            hidden_biases=r.floats("hidden_biases", q),
            output_weights=r.floats("output_weights", q),
            output_bias=float(r.floats("output_bias", 1)[0]),
        )
    else:
        raise ModelFormatError(f"unknown model kind {kind!r}")
    metadata: dict[str, str] = {}
    while True:
        line = r.next()
        if line == "end":
            break
        if not line.startswith("meta "):
            raise ModelFormatError(f"expected 'meta' or 'end', got {line!r}")
        _, key, value = line.split(" ", 2) if line.count(" ") >= 2 else (None, line[5:], "")
        metadata[key] = value
    return model, metadata


def load_model(data: bytes) -> SvrModel | AnnParams:
    return read_model_record(data)[0]


def predict(model: SvrModel | AnnParams, X: np.ndarray) -> np.ndarray:
    """Vectorized prediction for either model kind."""
    if isinstance(model, SvrModel):
        return svr_predict_batch(model, X)
    if isinstance(model, AnnParams):
        return ann_predict(model, X)
    raise UsageError(f"cannot predict with model of type {type(model).__name__}")


def predict_one(model: SvrModel | AnnParams, x) -> float:
    return float(predict(model, np.asarray(x, dtype=float).reshape(1, -1))[0])
