"""Approximations of the law of a generic proxy.

Each builder returns either a :class:`GaussianLaw` (parametric) or a
normalized :class:`Density1D` on a caller-supplied grid:

* plain calibration: a unit point mass at the selected value;
* criterion-adjusted calibration: the normalized criterion ``u(., theta*)``;
* Gaussian: ``N(mean, sd / sqrt(T))`` per coordinate, off-diagonal covariance dropped;
* weighted Laplace: density proportional to ``exp(T * Q_T) * w``;
* criterion-adjusted weighted Laplace: the expected criterion under the Laplace density.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .distributions import Density1D, GaussianLaw, dirac, grid_density, trapezoid_weights
from .errors import CovarianceError, DegenerateInputError, DomainError, ObjectiveError

DIV_T = "T"
DIV_TM1 = "T-1"

# u(theta, theta_prime) -> nonnegative, vectorized with broadcasting
CriterionFn = Callable[[np.ndarray, np.ndarray], np.ndarray]


def as_sample(observations) -> np.ndarray:
    x = np.asarray(observations, dtype=float)
    if x.ndim != 1:
        raise DomainError("a sample is a 1-D array of observations")
    if x.size < 2:
        raise DomainError(f"a sample needs T >= 2 observations, got {x.size}")
    if not np.all(np.isfinite(x)):
        raise DomainError("sample contains non-finite values")
    return x


def sample_mean(s) -> float:
    return float(np.mean(as_sample(s)))


def sample_sd(s, convention: str = DIV_T) -> float:
    """Sample standard deviation with divisor T (default) or T - 1."""
    x = as_sample(s)
    if convention == DIV_T:
        ddof = 0
    elif convention == DIV_TM1:
        ddof = 1
    else:
        raise DomainError(f"unknown sd convention {convention!r}")
    return float(np.std(x, ddof=ddof))


def gaussian_approx(s, convention: str = DIV_T) -> GaussianLaw:
    """``N(mean, s_T / sqrt(T))`` fitted to a sample."""
    x = as_sample(s)
    sd = sample_sd(x, convention)
    if sd == 0:
        raise DegenerateInputError("sample has zero standard deviation")
    return GaussianLaw(float(np.mean(x)), sd / math.sqrt(x.size))


def gaussian_approx_mv(theta_star, sigma_hat, T: int) -> list[GaussianLaw]:
    """One Gaussian per coordinate from the diagonal of ``sigma_hat``.

    Off-diagonal entries are ignored on purpose: the approximation uses the
    diagonal covariance only.
    """
    theta = np.atleast_1d(np.asarray(theta_star, dtype=float))
    sig = np.atleast_2d(np.asarray(sigma_hat, dtype=float))
    if sig.shape != (theta.size, theta.size):
        raise CovarianceError(f"sigma_hat has shape {sig.shape}, expected {(theta.size, theta.size)}")
    if T < 1:
        raise DomainError("T must be >= 1")
    diag = np.diag(sig)
    if np.any(~(diag > 0)):
        raise CovarianceError("covariance diagonal must be strictly positive")
    return [GaussianLaw(float(m), math.sqrt(v / T)) for m, v in zip(theta, diag)]


def gaussian_density(law: GaussianLaw, grid) -> Density1D:
    """Grid version of a Gaussian law (renormalized on the grid)."""
    grid = np.asarray(grid, dtype=float)
    return grid_density(grid, law.pdf(grid))


def plain_calibration(theta_star: float) -> Density1D:
    if not math.isfinite(theta_star):
        raise DomainError("calibrated value must be finite")
    return dirac(float(theta_star))


def criterion_adjusted_calibration(u: CriterionFn, theta_star: float, grid) -> Density1D:
    grid = np.asarray(grid, dtype=float)
    raw = _evaluate_criterion(u, grid, np.full_like(grid, theta_star))
    try:
        return grid_density(grid, raw)
    except DegenerateInputError:
        raise DegenerateInputError("criterion integrates to zero around the calibrated value") from None


def _evaluate_criterion(u, a, b) -> np.ndarray:
    vals = np.broadcast_to(np.asarray(u(a, b), dtype=float), np.broadcast(a, b).shape)
    if np.any(np.isnan(vals)):
        raise ObjectiveError("criterion returned NaN")
    if np.any(vals < 0):
        raise ObjectiveError("criterion must be nonnegative")
    return vals


@dataclass(frozen=True)
class ObjectiveFn:
    """Per-observation objective ``Q_T(sample, theta)`` and weight ``w(theta)``.

    ``evaluator`` must accept a sample and an array of theta values and
    return an array of the same shape; ``weight`` likewise maps theta values
    to nonnegative numbers (``None`` means ``w = 1``).
    """

    evaluator: Callable[[np.ndarray, np.ndarray], np.ndarray]
    weight: Optional[Callable[[np.ndarray], np.ndarray]] = None
    name: str = "custom"

    def log_kernel(self, sample, grid, T: int) -> np.ndarray:
        q = np.asarray(self.evaluator(sample, grid), dtype=float)
        q = np.broadcast_to(q, grid.shape)
        if np.any(np.isnan(q)):
            raise ObjectiveError(f"objective {self.name!r} returned NaN")
        if np.any(q == np.inf):
            raise ObjectiveError(f"objective {self.name!r} returned +inf")
        logk = T * q
        if self.weight is not None:
            w = np.broadcast_to(np.asarray(self.weight(grid), dtype=float), grid.shape)
            if np.any(np.isnan(w)) or np.any(w < 0) or np.any(np.isinf(w)):
                raise ObjectiveError("weight must be finite and nonnegative")
            with np.errstate(divide="ignore"):
                logk = logk + np.log(w)
        return logk


def laplace_approx(obj: ObjectiveFn, s, grid, T: Optional[int] = None) -> Density1D:
    """Grid density proportional to ``exp(T * Q_T(s, theta)) * w(theta)``.

    Evaluated in the log domain with the maximum subtracted first, so large T
    does not overflow.
    """
    x = as_sample(s)
    grid = np.asarray(grid, dtype=float)
    T = x.size if T is None else int(T)
    logk = obj.log_kernel(x, grid, T)
    top = np.max(logk)
    if not np.isfinite(top):
        raise DegenerateInputError("objective/weight is zero everywhere on the grid")
    return grid_density(grid, np.exp(logk - top))


def criterion_adjusted_laplace(
    u: CriterionFn, obj: ObjectiveFn, s, grid, T: Optional[int] = None
) -> Density1D:
    """Expected criterion ``f(theta) ~ int u(theta, t) laplace(t) dt`` on the grid.

    The inner integral is a dense trapezoid over the same grid (O(n^2)).
    """
    inner = laplace_approx(obj, s, grid, T)
    grid = inner.points
    kernel = _evaluate_criterion(u, grid[:, None], grid[None, :])
    raw = kernel @ (trapezoid_weights(grid) * inner.values)
    try:
        return grid_density(grid, raw)
    except DegenerateInputError:
        raise DegenerateInputError("expected criterion vanishes on the grid") from None
