"""Distances between an approximation and the true law of the proxy.

Numeric CDF distances (sup, L2, L1/Wasserstein-1) on an evaluation grid,
closed forms for pairs of Gaussians (Hellinger, Wasserstein-2, Kolmogorov),
the Berry-Esseen envelope, and a Monte-Carlo oracle for the law of the fitted
CDF evaluated at a point.

The Prokhorov metric is not computed; the Kolmogorov distance stands in for
it.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass
from typing import Optional

import numpy as np
from scipy import special

from .distributions import (
    STEP,
    Cdf,
    GaussianLaw,
    RngStream,
    binomial_mean_law,
)
from .errors import DomainError

BE_CONSTANT = 0.4748
BE_CONSTANT_MIN = 1.0 / math.sqrt(2.0 * math.pi)


@dataclass(frozen=True, eq=False)
class ProxyTruth:
    """Exact sampling law of a sample mean under a known data-generating process.

    ``theta0``, ``s`` and ``zeta`` are the mean, standard deviation and third
    absolute central moment of one observation; ``T`` is the sample size.
    """

    kind: str
    theta0: float
    s: float
    zeta: float
    T: int
    cdf: Cdf

    @property
    def limit_law(self) -> GaussianLaw:
        """``N(theta0, s / sqrt(T))``, the CLT approximation of the proxy law."""
        return GaussianLaw(self.theta0, self.s / math.sqrt(self.T))

    @property
    def is_step(self) -> bool:
        return self.cdf.kind == STEP


def gaussian_mean_truth(theta0: float, s: float, T: int) -> ProxyTruth:
    law = GaussianLaw(theta0, s / math.sqrt(T))
    zeta = 2.0 * math.sqrt(2.0 / math.pi) * s**3
    return ProxyTruth("gaussian-mean", float(theta0), float(s), zeta, int(T), law.to_cdf())


def binomial_mean_truth(T: int, p: float) -> ProxyTruth:
    if not 0.0 < p < 1.0:
        raise DomainError("Bernoulli parameter must lie in (0, 1)")
    s = math.sqrt(p * (1 - p))
    zeta = p * (1 - p) * (p**2 + (1 - p) ** 2)
    return ProxyTruth("binomial-mean", float(p), s, zeta, int(T), binomial_mean_law(T, p))


@dataclass
class DistanceReport:
    l2_cdf: float
    sup_cdf: float
    hellinger: Optional[float] = None
    wasserstein2: Optional[float] = None
    wasserstein1: Optional[float] = None
    berry_esseen_bound: Optional[float] = None
    kolmogorov_bound: Optional[float] = None

    def to_dict(self) -> dict:
        return asdict(self)


# ---------------------------------------------------------------------------
# numeric CDF distances


def effective_grid(*laws: GaussianLaw, n: int = 4001, width: float = 10.0, extra=None) -> np.ndarray:
    """Uniform grid over the union of ``mean +/- width * sd`` of the laws (and ``extra`` points)."""
    lo = min(l.mean - width * l.sd for l in laws) if laws else math.inf
    hi = max(l.mean + width * l.sd for l in laws) if laws else -math.inf
    if extra is not None and np.size(extra):
        lo, hi = min(lo, float(np.min(extra))), max(hi, float(np.max(extra)))
    return np.linspace(lo, hi, n)


def _refine(eval_grid, *cdfs: Cdf) -> np.ndarray:
    x = np.asarray(eval_grid, dtype=float).ravel()
    if x.size == 0:
        raise DomainError("evaluation grid is empty")
    parts = [x]
    span = max(float(x.max() - x.min()), 1.0)
    for F in cdfs:
        if F.kind == STEP and F.jumps is not None:
            parts.append(F.jumps)
            parts.append(F.jumps - 1e-12 * span)
    return np.unique(np.concatenate(parts))


def sup_cdf_distance(F1: Cdf, F2: Cdf, eval_grid) -> float:
    """``max |F1 - F2|`` over the grid refined with jumps and their left limits."""
    x = _refine(eval_grid, F1, F2)
    best = float(np.max(np.abs(F1(x) - F2(x))))
    for F in (F1, F2):
        if F.kind == STEP and F.jumps is not None:
            j = F.jumps
            best = max(best, float(np.max(np.abs(F1.left_limit(j) - F2.left_limit(j)))))
    return best


def l2_cdf_distance(F1: Cdf, F2: Cdf, eval_grid) -> float:
    x = _refine(eval_grid, F1, F2)
    if x.size < 2:
        return 0.0
    return math.sqrt(float(np.trapezoid((F1(x) - F2(x)) ** 2, x)))


def wasserstein1_numeric(F1: Cdf, F2: Cdf, eval_grid) -> float:
    """``int |F1 - F2| dx`` by the trapezoid rule."""
    x = _refine(eval_grid, F1, F2)
    if x.size < 2:
        return 0.0
    return float(np.trapezoid(np.abs(F1(x) - F2(x)), x))


# ---------------------------------------------------------------------------
# closed forms for two Gaussians (vectorized cores + scalar wrappers)


def hellinger_gaussian_arrays(ma, sa, mb, sb):
    ma, sa, mb, sb = map(np.asarray, (ma, sa, mb, sb))
    v = sa**2 + sb**2
    bc = np.sqrt(2.0 * sa * sb / v) * np.exp(-((ma - mb) ** 2) / (4.0 * v))
    return np.sqrt(2.0) * np.sqrt(np.clip(1.0 - bc, 0.0, None))


def wasserstein2_gaussian_arrays(ma, sa, mb, sb):
    ma, sa, mb, sb = map(np.asarray, (ma, sa, mb, sb))
    # sa^2 + sb^2 - 2 sa sb = (sa - sb)^2, written that way to avoid cancellation
    return np.sqrt((ma - mb) ** 2 + (sa - sb) ** 2)


def kolmogorov_gaussian_arrays(ma, sa, mb, sb):
    """Exact ``sup |F_a - F_b|`` for Gaussian pairs.

    The supremum sits where the densities cross: the midpoint when the sds
    are equal, otherwise one of the two roots of a quadratic.
    """
    ma, sa, mb, sb = np.broadcast_arrays(*(np.asarray(v, dtype=float) for v in (ma, sa, mb, sb)))
    equal = sa == sb
    out = np.empty(ma.shape)
    s_eq = np.where(equal, sa, 1.0)
    out[...] = 2.0 * special.ndtr(np.abs(ma - mb) / (2.0 * s_eq)) - 1.0

    a = 1.0 / sa**2 - 1.0 / sb**2
    b = -2.0 * (ma / sa**2 - mb / sb**2)
    c = ma**2 / sa**2 - mb**2 / sb**2 + 2.0 * np.log(sa / sb)
    disc = np.clip(b * b - 4.0 * a * c, 0.0, None)
    sgn = np.where(b >= 0, 1.0, -1.0)
    q = -0.5 * (b + sgn * np.sqrt(disc))
    with np.errstate(divide="ignore", invalid="ignore"):
        r1 = np.where(a != 0, q / np.where(a != 0, a, 1.0), np.nan)
        r2 = np.where(q != 0, c / np.where(q != 0, q, 1.0), np.nan)

    def gap(x):
        g = np.abs(special.ndtr((x - ma) / sa) - special.ndtr((x - mb) / sb))
        return np.where(np.isfinite(x), g, 0.0)

    uneq = np.maximum(gap(r1), gap(r2))
    out = np.where(equal, out, uneq)
    return out


def hellinger_gaussian(a: GaussianLaw, b: GaussianLaw) -> float:
    """Hellinger distance ``[int (sqrt f_a - sqrt f_b)^2]^(1/2)``, in ``[0, sqrt 2]``."""
    return float(hellinger_gaussian_arrays(a.mean, a.sd, b.mean, b.sd))


def wasserstein2_gaussian(a: GaussianLaw, b: GaussianLaw) -> float:
    return float(wasserstein2_gaussian_arrays(a.mean, a.sd, b.mean, b.sd))


def kolmogorov_gaussian_exact(a: GaussianLaw, b: GaussianLaw) -> float:
    return float(kolmogorov_gaussian_arrays(a.mean, a.sd, b.mean, b.sd))


# ---------------------------------------------------------------------------
# Berry-Esseen machinery


def berry_esseen_bound(third_abs_moment: float, sd: float, T: int, C: float = BE_CONSTANT) -> float:
    """``C * zeta / (sd^3 sqrt(T))`` with ``1/sqrt(2 pi) <= C <= 0.4748``."""
    if not BE_CONSTANT_MIN - 1e-12 <= C <= BE_CONSTANT:
        raise DomainError(f"Berry-Esseen constant {C} outside [{BE_CONSTANT_MIN:.4f}, {BE_CONSTANT}]")
    if third_abs_moment < 0 or not sd > 0 or T < 1:
        raise DomainError("need zeta >= 0, sd > 0 and T >= 1")
    return C * third_abs_moment / (sd**3 * math.sqrt(T))


def kolmogorov_error_bound(fitted: GaussianLaw, truth: ProxyTruth) -> float:
    """Triangle-inequality bound on ``sup |F_fitted - F_truth|``.

    Exact Kolmogorov distance from the fitted law to the CLT limit law plus
    the Berry-Esseen distance from the limit law to the truth.
    """
    return kolmogorov_gaussian_exact(fitted, truth.limit_law) + berry_esseen_bound(truth.zeta, truth.s, truth.T)


def distance_report(fitted: GaussianLaw, truth: ProxyTruth, n: int = 4001) -> DistanceReport:
    """All distances between a fitted Gaussian and a proxy truth."""
    F = fitted.to_cdf()
    if truth.is_step:
        grid = effective_grid(fitted, extra=truth.cdf.jumps, n=n)
        sup = sup_cdf_distance(F, truth.cdf, grid)
        rep = DistanceReport(
            l2_cdf=l2_cdf_distance(F, truth.cdf, grid),
            sup_cdf=sup,
            wasserstein1=wasserstein1_numeric(F, truth.cdf, grid),
            berry_esseen_bound=berry_esseen_bound(truth.zeta, truth.s, truth.T),
            kolmogorov_bound=kolmogorov_error_bound(fitted, truth),
        )
    else:
        law = truth.limit_law
        grid = effective_grid(fitted, law, n=n)
        rep = DistanceReport(
            l2_cdf=l2_cdf_distance(F, truth.cdf, grid),
            sup_cdf=kolmogorov_gaussian_exact(fitted, law),
            hellinger=hellinger_gaussian(fitted, law),
            wasserstein2=wasserstein2_gaussian(fitted, law),
            wasserstein1=wasserstein1_numeric(F, truth.cdf, grid),
        )
    return rep


# ---------------------------------------------------------------------------
# law of the fitted CDF at a point


def fitted_cdf_law_oracle(
    x: float,
    y: float,
    theta0: float,
    s: float,
    T: int,
    n_mc: int,
    stream: RngStream,
    s_known: bool = False,
    convention: str = "T",
) -> tuple[float, float]:
    """Monte-Carlo estimate of ``P(F_hat(x) <= y)`` and its standard error.

    ``F_hat(x) = Phi((x - mean) / (s_T / sqrt(T)))`` with the sample mean and
    sd of T i.i.d. ``N(theta0, s)`` observations, simulated through their
    exact joint law: mean normal, ``(T - 1) s^2_{T-1} / s^2`` chi-square with
    T - 1 degrees of freedom, independent.
    """
    if n_mc < 10_000:
        raise DomainError("n_mc must be >= 10_000")
    if T < 2 or not s > 0:
        raise DomainError("need T >= 2 and s > 0")
    gen = stream.generator()
    xbar = theta0 + (s / math.sqrt(T)) * gen.standard_normal(n_mc)
    if s_known:
        s_t = np.full(n_mc, s)
    else:
        w = gen.chisquare(T - 1, n_mc)
        div = T if convention == "T" else T - 1
        s_t = s * np.sqrt(w / div)
    fhat = special.ndtr((x - xbar) / (s_t / math.sqrt(T)))
    hits = fhat <= y
    est = float(hits.mean())
    return est, math.sqrt(max(est * (1 - est), 0.0) / n_mc)
