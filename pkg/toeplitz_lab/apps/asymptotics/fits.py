"""Empirical rate fits over a k sweep."""
from dataclasses import dataclass

import numpy as np
from scipy import stats

from toeplitz_lab.exceptions import RateFitError

MIN_POINTS = 4


@dataclass(frozen=True)
class RateFit:
    slope: float
    intercept: float
    r_squared: float

    @property
    def constant(self) -> float:
        return float(np.exp(self.intercept))


def _checked(ks, series) -> tuple:
    ks = np.asarray(ks, dtype=np.float64)
    series = np.asarray(series, dtype=np.float64)
    if ks.shape != series.shape or len(ks) < MIN_POINTS:
        raise RateFitError(f'Rate fits need at least {MIN_POINTS} (k, value) pairs, got {len(series)}')
    if not np.all(np.isfinite(series)) or np.any(series <= 0):
        raise RateFitError(f'Rate fits need a positive series, got {series.tolist()}')
    return ks, series


def fit_rate(ks, series) -> RateFit:
    """Least squares log(err) = slope·log(k) + intercept."""
    ks, series = _checked(ks, series)
    result = stats.linregress(np.log(ks), np.log(series))
    return RateFit(slope=float(result.slope), intercept=float(result.intercept), r_squared=float(result.rvalue ** 2))


def fit_exponential(ks, series) -> RateFit:
    """Least squares log(err) = slope·k + intercept; the decay rate is −slope."""
    ks, series = _checked(ks, series)
    result = stats.linregress(ks, np.log(series))
    return RateFit(slope=float(result.slope), intercept=float(result.intercept), r_squared=float(result.rvalue ** 2))
