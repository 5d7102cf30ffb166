"""Terminal payoffs with known transform routes.

Each payoff is a callable on an array of terminal prices.  Anything else
callable is accepted by the Monte Carlo routes only.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class IndicatorAbove:
    level: float

    def __call__(self, s):
        return (np.asarray(s) > self.level).astype(float)


@dataclass(frozen=True)
class IndicatorBelow:
    level: float

    def __call__(self, s):
        return (np.asarray(s) < self.level).astype(float)


@dataclass(frozen=True)
class PowerIndicator:
    """s**power on {s > level} (``above``) or {s < level}."""

    power: float
    level: float
    above: bool = True

    def __call__(self, s):
        s = np.asarray(s, dtype=float)
        hit = s > self.level if self.above else s < self.level
        return np.where(hit, s**self.power, 0.0)


CLOSED_SET = (IndicatorAbove, IndicatorBelow, PowerIndicator)
