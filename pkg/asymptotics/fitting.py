from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np


class AsymptoticsError(Exception):
    pass


class NonPositiveValue(AsymptoticsError):
    def __init__(self, message: str, *, index: int | None = None, value: float | None = None):
        super().__init__(message)
        self.index = index
        self.value = value


@dataclass(frozen=True)
class GrowthFit:
    slope: float
    intercept: float
    residual: float

    @property
    def constant(self) -> float:
        return math.exp(self.intercept)


def fit_growth_order(k_ladder: Sequence[float], values: Sequence[float]) -> GrowthFit:
    """Least-squares slope of log|value| against log k."""
    ks = np.asarray(k_ladder, dtype=float)
    vs = np.asarray(values, dtype=float)
    if ks.size != vs.size:
        raise AsymptoticsError(f"{ks.size} values of k for {vs.size} samples")
    if ks.size < 4:
        raise AsymptoticsError(f"a growth fit needs at least 4 samples, got {ks.size}")
    bad = np.flatnonzero(~(vs > 0) | ~np.isfinite(vs))
    if bad.size:
        i = int(bad[0])
        raise NonPositiveValue(f"sample {i} at k={ks[i]:g} is {vs[i]!r}", index=i, value=float(vs[i]))

    x, y = np.log(ks), np.log(vs)
    slope, intercept = np.polyfit(x, y, 1)
    residual = float(np.sqrt(np.mean((y - (slope * x + intercept)) ** 2)))
    return GrowthFit(float(slope), float(intercept), residual)


def log_slope(k_ladder: Sequence[float], values: Sequence[float]) -> float:
    """d log|value|/dk by finite difference over the last two samples."""
    if len(k_ladder) < 2:
        raise AsymptoticsError("a slope needs two samples")
    (k1, k2), (v1, v2) = k_ladder[-2:], values[-2:]
    if not (abs(v1) > 0 and abs(v2) > 0):
        raise NonPositiveValue(f"cannot take the logarithm of {v1!r}, {v2!r}")
    return (math.log(abs(v2)) - math.log(abs(v1))) / (k2 - k1)


def is_strictly_decreasing(values: Sequence[float]) -> bool:
    return all(b < a for a, b in zip(values, values[1:]))


def is_non_increasing(values: Sequence[float], slack: float = 1e-12) -> bool:
    return all(b <= a + slack * max(abs(a), 1.0) for a, b in zip(values, values[1:]))
