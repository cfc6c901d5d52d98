"""Binary irrigation decision from a predicted deepest-layer moisture."""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

from ..ann import AnnParams
from ..errors import UsageError
from ..modelio import predict_one
from ..svr import SvrModel


class Decision(Enum):
    OPEN = "OPEN"
    CLOSE = "CLOSE"
    HOLD = "HOLD"


@dataclass(frozen=True)
class ControllerConfig:
    """Setpoint for the deepest layer with a relative tolerance band.

    The band is relative: the controller acts only when the predicted
    moisture leaves [setpoint*(1-band), setpoint*(1+band)].
    """

    setpoint: float
    band: float = 0.05
    horizon: int = 3
    model: SvrModel | AnnParams | None = None

    def __post_init__(self):
        if not (0.0 < self.setpoint < 1.0):
            raise UsageError("setpoint must lie in (0, 1)")
        if not (0.0 < self.band < 1.0):
            raise UsageError("band must lie in (0, 1)")


def controller_decide(config: ControllerConfig, features, faucet_open: bool) -> Decision:
    """OPEN below the band, CLOSE above it, HOLD inside (keep current state).

    `faucet_open` is the state HOLD preserves; the threshold decision itself
    depends only on the clamped prediction.
    """
    if config.model is None:
        raise UsageError("controller has no prediction model loaded")
    predicted = float(np.clip(predict_one(config.model, features), 0.0, 1.0))
    if predicted < config.setpoint * (1.0 - config.band):
        return Decision.OPEN
    if predicted > config.setpoint * (1.0 + config.band):
        return Decision.CLOSE
    return Decision.HOLD
