"""Elementary distribution machinery.

Gaussian pdf/cdf/quantile, the exact law of a scaled binomial mean, grid and
atomic densities, their CDFs, the inverse-transform sampler used to build a
generic proxy, and counter-based uniform streams.

All numeric functions accept scalars or numpy arrays and broadcast.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy import special, stats

from .errors import DegenerateInputError, DomainError, GridError

LEBESGUE = "lebesgue"
COUNTING = "counting"

CONTINUOUS = "continuous"
STEP = "step"

_SQRT_2PI = math.sqrt(2.0 * math.pi)
_MASK64 = (1 << 64) - 1


@dataclass(frozen=True)
class GaussianLaw:
    """Univariate normal law parameterised by mean and standard deviation."""

    mean: float
    sd: float

    def __post_init__(self):
        if not math.isfinite(self.mean):
            raise DomainError(f"mean must be finite, got {self.mean!r}")
        if not (self.sd > 0 and math.isfinite(self.sd)):
            raise DomainError(f"sd must be finite and > 0, got {self.sd!r}")

    def pdf(self, x):
        return gaussian_pdf(x, self)

    def cdf(self, x):
        return gaussian_cdf(x, self)

    def quantile(self, p):
        return gaussian_quantile(p, self)

    def to_cdf(self) -> "Cdf":
        return Cdf(self.cdf, CONTINUOUS, self.quantile)

    def grid(self, n: int = 2001, width: float = 8.0) -> np.ndarray:
        """Uniform grid covering ``mean +/- width * sd`` with ``n`` points."""
        return np.linspace(self.mean - width * self.sd, self.mean + width * self.sd, n)


STANDARD_NORMAL = GaussianLaw(0.0, 1.0)


def gaussian_pdf(x, law: GaussianLaw = STANDARD_NORMAL):
    z = (np.asarray(x, dtype=float) - law.mean) / law.sd
    out = np.exp(-0.5 * z * z) / (law.sd * _SQRT_2PI)
    return out if out.ndim else float(out)


def gaussian_cdf(x, law: GaussianLaw = STANDARD_NORMAL):
    # ndtr switches to erfc in the tails, keeping absolute error ~1e-16
    out = special.ndtr((np.asarray(x, dtype=float) - law.mean) / law.sd)
    return out if np.ndim(out) else float(out)


def gaussian_quantile(p, law: GaussianLaw = STANDARD_NORMAL):
    p = np.asarray(p, dtype=float)
    if np.any(~((p > 0) & (p < 1))):
        raise DomainError("gaussian_quantile requires 0 < p < 1")
    out = law.mean + law.sd * special.ndtri(p)
    return out if out.ndim else float(out)


def binomial_mean_cdf(x, T: int, p: float):
    """P(S / T <= x) for S ~ Binomial(T, p); a right-continuous step function."""
    if T < 1:
        raise DomainError("T must be >= 1")
    if not 0.0 <= p <= 1.0:
        raise DomainError("p must lie in [0, 1]")
    x = np.asarray(x, dtype=float)
    # x*T can land a few ulps below an integer (0.29 * 100 = 28.999...)
    k = np.floor(x * T + 1e-9 * max(T, 1))
    out = stats.binom.cdf(k, T, p)
    out = np.where(k < 0, 0.0, np.where(k >= T, 1.0, out))
    return out if out.ndim else float(out)


class Cdf:
    """A cumulative distribution function with its generalized inverse.

    Parameters
    ----------
    evaluator : callable
        Vectorized ``x -> F(x)``.
    kind : {"continuous", "step"}
    quantile : callable
        Vectorized ``u -> inf{z : F(z) >= u}``.
    jumps : array, optional
        Jump locations of a step CDF; distance computations use them to
        capture left limits.
    """

    def __init__(self, evaluator: Callable, kind: str, quantile: Callable, jumps=None):
        if kind not in (CONTINUOUS, STEP):
            raise ValueError(f"unknown CDF kind {kind!r}")
        self._evaluator = evaluator
        self.kind = kind
        self._quantile = quantile
        self.jumps = None if jumps is None else np.asarray(jumps, dtype=float)

    def __call__(self, x):
        return self._evaluator(x)

    def quantile(self, u):
        return self._quantile(u)

    def left_limit(self, x):
        """F(x-). Equal to F(x) for continuous CDFs."""
        if self.kind == CONTINUOUS:
            return self(x)
        x = np.asarray(x, dtype=float)
        j = np.searchsorted(self.jumps, x, side="left") - 1
        cum = self._cum
        out = np.where(j >= 0, cum[np.clip(j, 0, None)], 0.0)
        return out if out.ndim else float(out)


def step_cdf(points, cumulative) -> Cdf:
    """Right-continuous step CDF jumping at ``points`` to the ``cumulative`` values."""
    pts = np.asarray(points, dtype=float)
    cum = np.asarray(cumulative, dtype=float)
    if pts.ndim != 1 or pts.shape != cum.shape or pts.size == 0:
        raise GridError("points and cumulative must be equal-length 1-D arrays")
    if np.any(np.diff(pts) <= 0):
        raise GridError("atom points must be strictly increasing")

    def evaluate(x):
        x = np.asarray(x, dtype=float)
        j = np.searchsorted(pts, x, side="right") - 1
        out = np.where(j >= 0, cum[np.clip(j, 0, None)], 0.0)
        return out if out.ndim else float(out)

    def quantile(u):
        u = _check_open_unit(u)
        i = np.minimum(np.searchsorted(cum, u, side="left"), pts.size - 1)
        out = pts[i]
        return out if out.ndim else float(out)

    cdf = Cdf(evaluate, STEP, quantile, jumps=pts)
    cdf._cum = cum
    return cdf


def binomial_mean_law(T: int, p: float) -> Cdf:
    """Exact step CDF of the mean of T Bernoulli(p) draws."""
    k = np.arange(T + 1)
    pts = k / T
    cum = stats.binom.cdf(k, T, p)
    cum[-1] = 1.0
    if p in (0.0, 1.0):
        keep = stats.binom.pmf(k, T, p) > 0
        pts, cum = pts[keep], cum[keep]
    return step_cdf(pts, cum)


@dataclass(frozen=True, eq=False)
class Density1D:
    """Normalized density on a uniform grid (Lebesgue) or a finite atom set (counting).

    For the Lebesgue case ``values`` are density heights at ``points``; for the
    counting case they are atom masses. ``weights`` holds the quadrature
    weight attached to each point (trapezoid weights, or 1 for atoms), so
    ``masses = weights * values`` sums to one.
    """

    measure: str
    points: np.ndarray
    values: np.ndarray
    tol: float = 1e-10
    weights: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=float)
        vals = np.asarray(self.values, dtype=float)
        object.__setattr__(self, "points", pts)
        object.__setattr__(self, "values", vals)
        if pts.ndim != 1 or pts.shape != vals.shape:
            raise GridError("points and values must be equal-length 1-D arrays")
        if np.any(vals < 0) or not np.all(np.isfinite(vals)):
            raise DomainError("density values must be finite and nonnegative")
        if self.measure == LEBESGUE:
            h = _check_uniform(pts)
            w = np.full(pts.size, h)
            w[0] = w[-1] = h / 2
        elif self.measure == COUNTING:
            if pts.size == 0:
                raise GridError("a counting density needs at least one atom")
            if np.any(np.diff(pts) <= 0):
                raise GridError("atom points must be distinct and sorted")
            w = np.ones(pts.size)
        else:
            raise ValueError(f"unknown measure {self.measure!r}")
        object.__setattr__(self, "weights", w)
        total = float(np.sum(w * vals))
        if abs(total - 1.0) > self.tol:
            raise DegenerateInputError(f"density mass is {total!r}, not 1 within {self.tol}")

    @property
    def spacing(self) -> float:
        if self.measure != LEBESGUE:
            return 0.0
        return float(self.points[1] - self.points[0])

    @property
    def masses(self) -> np.ndarray:
        return self.weights * self.values

    @property
    def is_atomic(self) -> bool:
        return self.measure == COUNTING

    def __len__(self):
        return self.points.size


def _check_uniform(pts: np.ndarray) -> float:
    if pts.size < 2:
        raise GridError("a grid needs at least 2 points")
    d = np.diff(pts)
    h = (pts[-1] - pts[0]) / (pts.size - 1)
    if not h > 0:
        raise GridError("grid must be strictly increasing")
    scale = max(float(np.max(np.abs(pts))), h)
    if np.any(np.abs(d - h) > 1e-12 * h + 8 * np.finfo(float).eps * scale):
        raise GridError("grid spacing is not uniform")
    return float(h)


def trapezoid_weights(points) -> np.ndarray:
    pts = np.asarray(points, dtype=float)
    h = _check_uniform(pts)
    w = np.full(pts.size, h)
    w[0] = w[-1] = h / 2
    return w


def grid_density(points, raw_values, tol: float = 1e-10) -> Density1D:
    """Normalize nonnegative heights on a uniform grid with the trapezoid rule."""
    pts = np.asarray(points, dtype=float)
    raw = np.asarray(raw_values, dtype=float)
    if pts.shape != raw.shape:
        raise GridError("points and raw_values differ in shape")
    if np.any(np.isnan(raw)) or np.any(raw < 0):
        raise DomainError("raw density values must be nonnegative")
    w = trapezoid_weights(pts)
    if not np.all(np.isfinite(raw)):
        raise DomainError("raw density values must be finite")
    total = float(np.sum(w * raw))
    if not total > 0:
        raise DegenerateInputError("raw density has zero mass on the grid")
    return Density1D(LEBESGUE, pts, raw / total, tol=tol)


def atom_density(points, masses, tol: float = 1e-10) -> Density1D:
    pts = np.atleast_1d(np.asarray(points, dtype=float))
    m = np.atleast_1d(np.asarray(masses, dtype=float))
    order = np.argsort(pts, kind="stable")
    return Density1D(COUNTING, pts[order], m[order], tol=tol)


def dirac(point: float) -> Density1D:
    return atom_density([point], [1.0])


def density_cdf(d: Density1D) -> Cdf:
    """CDF of a density: cumulative trapezoid (grid) or cumulative mass (atoms)."""
    if d.measure == COUNTING:
        return step_cdf(d.points, np.cumsum(d.values))

    pts, f = d.points, d.values
    h = d.spacing
    cum = np.concatenate([[0.0], np.cumsum(0.5 * h * (f[1:] + f[:-1]))])

    def evaluate(x):
        out = np.interp(np.asarray(x, dtype=float), pts, cum, left=0.0, right=1.0)
        return out if out.ndim else float(out)

    def quantile(u):
        u = _check_open_unit(u)
        i = np.searchsorted(cum, u, side="left")
        i = np.clip(i, 1, pts.size - 1)
        lo, hi = cum[i - 1], cum[i]
        frac = np.where(hi > lo, (u - lo) / np.where(hi > lo, hi - lo, 1.0), 0.0)
        out = pts[i - 1] + np.clip(frac, 0.0, 1.0) * h
        return out if out.ndim else float(out)

    cdf = Cdf(evaluate, CONTINUOUS, quantile)
    cdf.grid = pts
    return cdf


def _check_open_unit(u):
    u = np.asarray(u, dtype=float)
    if np.any(~((u > 0) & (u < 1))):
        raise DomainError("u must lie in the open interval (0, 1)")
    return u


def sample_generic_proxy(f: Cdf, u):
    """Inverse-transform draw ``inf{z : F(z) >= u}``.

    Fed with uniforms that are independent of the data, the result has the
    law ``F`` and is itself independent of the data: a generic proxy.
    """
    return f.quantile(u)


@dataclass(frozen=True)
class RngStream:
    """Counter-based uniform stream identified by ``(seed, stream_id)``.

    Backed by Philox with the 128-bit key ``seed | stream_id << 64``, so every
    stream id addresses its own keyed sequence regardless of how many other
    streams exist or which thread consumes them.
    """

    seed: int
    stream_id: int = 0

    def bit_generator(self) -> np.random.Philox:
        key = (int(self.seed) & _MASK64) | ((int(self.stream_id) & _MASK64) << 64)
        return np.random.Philox(key=key)

    def generator(self) -> np.random.Generator:
        return np.random.Generator(self.bit_generator())

    def spawn(self, offset: int) -> "RngStream":
        """A sibling stream under a derived seed (for auxiliary draws)."""
        return RngStream((int(self.seed) + 0x9E3779B97F4A7C15 * (offset + 1)) & _MASK64, self.stream_id)


def uniforms(stream: RngStream, n: int) -> np.ndarray:
    """``n`` uniforms in the open interval (0, 1), deterministic in the stream."""
    if n < 0:
        raise DomainError("n must be >= 0")
    if n == 0:
        return np.empty(0)
    raw = stream.bit_generator().random_raw(n)
    return ((raw >> np.uint64(11)).astype(float) + 0.5) * 2.0**-53
