"""Standard-error adjustment by sqrt(2) and the level conversions it implies.

When the approximation's own center and scale are estimated from the same
data, the difference between a generic proxy and the realized estimate has
twice the variance of either. Intervals built from one standard error
under-cover; widening them by ``sqrt(2)`` restores the nominal level
asymptotically. The conversions below are closed forms in ``Phi`` and its
inverse.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import special

from .errors import DomainError

SQRT2 = math.sqrt(2.0)


def _two_sided_quantile(alpha) -> np.ndarray:
    # u_{1 - alpha/2}
    return special.ndtri(1.0 - np.asarray(alpha, dtype=float) / 2.0)


def _check_open(alpha: float) -> float:
    alpha = float(alpha)
    if not 0.0 < alpha < 1.0:
        raise DomainError(f"alpha must lie in (0, 1), got {alpha!r}")
    return alpha


def _check_half_open(alpha) -> np.ndarray:
    a = np.asarray(alpha, dtype=float)
    if np.any(~((a > 0.0) & (a <= 1.0))):
        raise DomainError("alpha must lie in (0, 1]")
    return a


def _out(x):
    return float(x) if np.ndim(x) == 0 else x


@dataclass(frozen=True)
class IntervalSpec:
    """Symmetric interval ``center -/+ m * se * u_{1-alpha/2}`` with ``m = sqrt 2`` if adjusted."""

    center: float
    se: float
    level: float
    adjusted: bool = False

    def __post_init__(self):
        if not self.se >= 0:
            raise DomainError("standard error must be >= 0")
        if not 0.0 < self.level < 1.0:
            raise DomainError("level must lie in (0, 1)")

    @property
    def half_width(self) -> float:
        m = SQRT2 if self.adjusted else 1.0
        return m * self.se * float(_two_sided_quantile(1.0 - self.level))

    @property
    def endpoints(self) -> tuple[float, float]:
        hw = self.half_width
        return self.center - hw, self.center + hw


def unadjusted_interval(center: float, se: float, alpha: float) -> tuple[float, float]:
    return IntervalSpec(float(center), float(se), 1.0 - _check_open(alpha), False).endpoints


def adjusted_interval(center: float, se: float, alpha: float) -> tuple[float, float]:
    return IntervalSpec(float(center), float(se), 1.0 - _check_open(alpha), True).endpoints


def nominal_to_adjusted(alpha):
    """Asymptotic rejection rate ``2 (1 - Phi(u_{1-alpha/2} / sqrt 2))`` of an unadjusted size-alpha test."""
    a = _check_half_open(alpha)
    # 2 * (1 - Phi(z)) = 2 * Phi(-z), computed without cancellation
    return _out(2.0 * special.ndtr(-_two_sided_quantile(a) / SQRT2))


def adjusted_to_nominal(alpha):
    """``2 (1 - Phi(sqrt 2 * u_{1-alpha/2}))``: the nominal level matching an adjusted one."""
    a = _check_half_open(alpha)
    return _out(2.0 * special.ndtr(-SQRT2 * _two_sided_quantile(a)))


def adjust_critical_value(c):
    c_arr = np.asarray(c, dtype=float)
    if np.any(~(c_arr >= 0)):
        raise DomainError("critical value must be >= 0")
    return _out(SQRT2 * c_arr)


def asymptotic_unadjusted_coverage(alpha):
    """Limit coverage ``2 Phi(u_{1-alpha/2} / sqrt 2) - 1`` of the unadjusted interval."""
    a = np.asarray(alpha, dtype=float)
    if np.any(~((a > 0.0) & (a < 1.0))):
        raise DomainError("alpha must lie in (0, 1)")
    # 1 - 2 Phi(-z) is the same quantity, written to complement nominal_to_adjusted exactly
    return _out(1.0 - 2.0 * special.ndtr(-_two_sided_quantile(a) / SQRT2))


def conversion_curve(alphas=None, n: int = 512) -> np.ndarray:
    """Rows ``(alpha, nominal_to_adjusted(alpha))``, sorted by alpha.

    Defaults to ``n`` equally spaced levels in ``(0, 1]``.
    """
    if alphas is None:
        alphas = np.arange(1, n + 1) / n
    a = np.sort(_check_half_open(np.atleast_1d(alphas)))
    return np.column_stack([a, nominal_to_adjusted(a)])
