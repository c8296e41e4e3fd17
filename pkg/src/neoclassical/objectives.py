"""Ready-made objectives, weights and criterion functions.

Objectives are stored as per-observation averages ``Q_T`` so that
``exp(T * Q_T)`` is the likelihood for the likelihood objectives.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any, Mapping

import numpy as np

from .approximations import ObjectiveFn
from .distributions import COUNTING, Density1D
from .errors import AlignmentError, ConfigError, DegenerateInputError

OBJECTIVES = ("gaussian-loglik", "bernoulli-loglik", "least-squares")
WEIGHTS = ("flat", "indicator-interval", "gaussian-kernel")
CRITERIA = ("indicator", "gaussian-kernel")


@dataclass(frozen=True)
class ObjectiveSpec:
    name: str
    params: Mapping[str, Any] = field(default_factory=dict)
    weight_name: str = "flat"
    weight_params: Mapping[str, Any] = field(default_factory=dict)

    @classmethod
    def from_dict(cls, d: Mapping[str, Any]) -> "ObjectiveSpec":
        if "name" not in d:
            raise ConfigError("objective spec needs a 'name'")
        return cls(
            name=d["name"],
            params=dict(d.get("params", {})),
            weight_name=d.get("weight_name", d.get("weight", "flat")),
            weight_params=dict(d.get("weight_params", {})),
        )


def _positive(params, key, default=None) -> float:
    v = params.get(key, default)
    try:
        v = float(v)
    except (TypeError, ValueError):
        raise ConfigError(f"parameter {key!r} must be a number, got {v!r}") from None
    if not (v > 0 and math.isfinite(v)):
        raise ConfigError(f"parameter {key!r} must be > 0, got {v!r}")
    return v


def _gaussian_loglik(sigma: float):
    const = -math.log(sigma * math.sqrt(2 * math.pi))

    def q(sample, theta):
        theta = np.asarray(theta, dtype=float)
        xbar = sample.mean()
        # mean((x - t)^2) = var_T(x) + (xbar - t)^2
        msd = np.mean((sample - xbar) ** 2) + (xbar - theta) ** 2
        return const - msd / (2 * sigma**2)

    return q


def _bernoulli_loglik(sample, theta):
    theta = np.asarray(theta, dtype=float)
    xbar = float(np.mean(sample))
    # keep log() finite at grid endpoints 0 and 1 by clamping one grid step inside
    h = float(np.min(np.diff(np.unique(theta)))) if np.unique(theta).size > 1 else 1e-12
    t = np.clip(theta, h, 1 - h)
    return xbar * np.log(t) + (1 - xbar) * np.log1p(-t)


def _least_squares(powers, scales):
    def q(sample, theta):
        theta = np.asarray(theta, dtype=float)
        out = np.zeros_like(theta)
        for k, c in zip(powers, scales):
            out = out - c * (np.mean(sample**k) - theta**k) ** 2
        return out

    return q


def build_weight(name: str, params: Mapping[str, Any] | None = None):
    params = params or {}
    if name == "flat":
        return None
    if name == "indicator-interval":
        lo = float(params.get("lo", -math.inf))
        hi = float(params.get("hi", math.inf))
        if not lo < hi:
            raise ConfigError("indicator-interval needs lo < hi")
        return lambda t: ((np.asarray(t) >= lo) & (np.asarray(t) <= hi)).astype(float)
    if name == "gaussian-kernel":
        center = float(params.get("center", 0.0))
        scale = _positive(params, "scale", 1.0)
        return lambda t: np.exp(-0.5 * ((np.asarray(t, dtype=float) - center) / scale) ** 2)
    raise ConfigError(f"unknown weight {name!r}; choose from {WEIGHTS}")


def build_objective(spec: ObjectiveSpec | Mapping[str, Any]) -> ObjectiveFn:
    if not isinstance(spec, ObjectiveSpec):
        spec = ObjectiveSpec.from_dict(spec)
    p = spec.params
    if spec.name == "gaussian-loglik":
        q = _gaussian_loglik(_positive(p, "sigma", 1.0))
    elif spec.name == "bernoulli-loglik":
        q = _bernoulli_loglik
    elif spec.name == "least-squares":
        powers = [int(k) for k in p.get("powers", [1])]
        if not powers or any(k < 1 for k in powers):
            raise ConfigError("least-squares powers must be positive integers")
        scales = [float(c) for c in p.get("scales", [1.0] * len(powers))]
        if len(scales) != len(powers) or any(c < 0 for c in scales):
            raise ConfigError("least-squares scales must be nonnegative, one per power")
        q = _least_squares(powers, scales)
    else:
        raise ConfigError(f"unknown objective {spec.name!r}; choose from {OBJECTIVES}")
    return ObjectiveFn(q, build_weight(spec.weight_name, spec.weight_params), name=spec.name)


def build_criterion(name: str, params: Mapping[str, Any] | None = None):
    """Criterion ``u(theta, theta')``, maximal on the diagonal."""
    params = params or {}
    allowed = {"indicator": {"half_width"}, "gaussian-kernel": {"tau"}}
    unknown = set(params) - allowed.get(name, set(params))
    if unknown:
        raise ConfigError(f"unknown parameters for criterion {name!r}: {sorted(unknown)}")
    if name == "indicator":
        half = _positive(params, "half_width", 0.5)
        return lambda a, b: (np.abs(np.asarray(a) - np.asarray(b)) <= half).astype(float)
    if name == "gaussian-kernel":
        tau = _positive(params, "tau", 1.0)
        return lambda a, b: np.exp(-0.5 * ((np.asarray(a, dtype=float) - np.asarray(b)) / tau) ** 2)
    raise ConfigError(f"unknown criterion {name!r}; choose from {CRITERIA}")


def weight_change_of_measure(plain: Density1D, weighted: Density1D) -> np.ndarray:
    """Pointwise ratio weighted / plain: the weight recovered up to a constant.

    Points where both densities vanish get 0.
    """
    if plain.measure == COUNTING or weighted.measure == COUNTING:
        raise AlignmentError("change of measure is defined for grid densities")
    if plain.points.shape != weighted.points.shape or not np.allclose(plain.points, weighted.points, rtol=0, atol=1e-12):
        raise AlignmentError("densities live on different grids")
    if np.any((weighted.values > 0) & (plain.values == 0)):
        raise DegenerateInputError("weighted density has mass where the plain one has none")
    out = np.zeros_like(plain.values)
    pos = plain.values > 0
    out[pos] = weighted.values[pos] / plain.values[pos]
    return out
