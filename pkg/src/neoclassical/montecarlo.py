"""Monte-Carlo assessment of Gaussian approximations of a sample mean.

For each data-generating process and sample size, ``M`` samples are drawn,
``N(mean, s_T / sqrt(T))`` is fitted to each, and the fit is compared with the
exact law of the sample mean: RMSEs of the fitted center and scale, L2 and sup
distances between CDFs, and the exact probability that an independent draw
from the true law falls in the unadjusted and sqrt(2)-adjusted intervals.

Replication ``r`` always reads stream ``r`` of the configured seed, so every
DGP sees the same uniforms and results do not depend on how replications are
split across workers.
"""

from __future__ import annotations

import io
import csv
import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass
from typing import Any, Mapping, Optional, Sequence

import numpy as np
from scipy import special, stats

from .approximations import DIV_T, DIV_TM1
from .distributions import GaussianLaw, RngStream, uniforms
from .errors import ConfigError, DomainError
from .fileio import fmt_number
from .metrics import (
    ProxyTruth,
    binomial_mean_truth,
    gaussian_mean_truth,
    kolmogorov_gaussian_arrays,
)

SCHEMA_VERSION = 1
DEFAULT_LEVELS = (0.68, 0.90, 0.95, 0.99)
DEFAULT_SAMPLE_SIZES = (20, 50, 100)
PROFILE_REPLICATIONS = {"paper": 10_000, "ci": 2_000}
BLOCK_SIZE = 500
# points of the uniform part of the L2 integration grid
L2_POINTS = 2001
L2_WIDTH = 10.0


@dataclass(frozen=True)
class GaussianDGP:
    theta0: float
    s: float

    def __post_init__(self):
        if not (self.s > 0 and math.isfinite(self.s) and math.isfinite(self.theta0)):
            raise ConfigError("Gaussian DGP needs finite theta0 and s > 0")

    @property
    def label(self) -> str:
        return f"N({self.theta0:g},{self.s:g})"

    @property
    def mean(self) -> float:
        return self.theta0

    @property
    def sd(self) -> float:
        return self.s

    def draw(self, u: np.ndarray) -> np.ndarray:
        return self.theta0 + self.s * special.ndtri(u)

    def truth(self, T: int) -> ProxyTruth:
        return gaussian_mean_truth(self.theta0, self.s, T)

    def to_dict(self) -> dict:
        return {"family": "gaussian", "theta0": self.theta0, "s": self.s}


@dataclass(frozen=True)
class BernoulliDGP:
    p: float

    def __post_init__(self):
        if not 0.0 < self.p < 1.0:
            raise ConfigError("Bernoulli DGP needs p in (0, 1)")

    @property
    def label(self) -> str:
        return f"B({self.p:.6g})"

    @property
    def mean(self) -> float:
        return self.p

    @property
    def sd(self) -> float:
        return math.sqrt(self.p * (1 - self.p))

    def draw(self, u: np.ndarray) -> np.ndarray:
        return (u < self.p).astype(float)

    def truth(self, T: int) -> ProxyTruth:
        return binomial_mean_truth(T, self.p)

    def to_dict(self) -> dict:
        return {"family": "bernoulli", "p": self.p}


def dgp_from_dict(d: Mapping[str, Any]):
    fam = d.get("family")
    try:
        if fam == "gaussian":
            return GaussianDGP(float(d.get("theta0", 0.0)), float(d["s"]))
        if fam == "bernoulli":
            return BernoulliDGP(float(d["p"]))
    except KeyError as e:
        raise ConfigError(f"dgp.{e.args[0]}: missing field") from None
    except (TypeError, ValueError):
        raise ConfigError(f"dgp: non-numeric parameter in {dict(d)!r}") from None
    raise ConfigError(f"dgp.family: expected 'gaussian' or 'bernoulli', got {fam!r}")


def default_dgps() -> list:
    # the second Bernoulli halves the sd of B(.5), as N(0,.2) halves N(0,.4)
    return [GaussianDGP(0.0, 0.2), GaussianDGP(0.0, 0.4), BernoulliDGP((2 - math.sqrt(3)) / 4), BernoulliDGP(0.5)]


@dataclass(frozen=True)
class AssessmentConfig:
    dgps: tuple
    sample_sizes: tuple = DEFAULT_SAMPLE_SIZES
    replications: int = PROFILE_REPLICATIONS["paper"]
    levels: tuple = DEFAULT_LEVELS
    seed: int = 0
    sd_convention: str = DIV_T
    schema_version: int = SCHEMA_VERSION

    def __post_init__(self):
        if not self.dgps:
            raise ConfigError("dgps: at least one DGP required")
        if not self.sample_sizes or any(int(T) != T or T < 2 for T in self.sample_sizes):
            raise ConfigError("sample_sizes: every T must be an integer >= 2")
        if int(self.replications) != self.replications or self.replications < 1:
            raise ConfigError("replications: must be an integer >= 1")
        if not self.levels or any(not 0.0 < l < 1.0 for l in self.levels):
            raise ConfigError("levels: every level must lie in (0, 1)")
        if self.sd_convention not in (DIV_T, DIV_TM1):
            raise ConfigError(f"sd_convention: expected {DIV_T!r} or {DIV_TM1!r}")
        if int(self.seed) != self.seed or self.seed < 0:
            raise ConfigError("seed: must be a nonnegative integer")

    @classmethod
    def from_dict(cls, d: Mapping[str, Any]) -> "AssessmentConfig":
        if not isinstance(d, Mapping):
            raise ConfigError("config must be a JSON object")
        version = d.get("schema_version", SCHEMA_VERSION)
        if version != SCHEMA_VERSION:
            raise ConfigError(f"schema_version: unsupported value {version!r}")
        if "seed" not in d:
            raise ConfigError("seed: missing field")
        profile = d.get("profile", "paper")
        if profile not in PROFILE_REPLICATIONS:
            raise ConfigError(f"profile: expected one of {sorted(PROFILE_REPLICATIONS)}")
        raw = d.get("dgps", [d["dgp"]] if "dgp" in d else None)
        dgps = tuple(dgp_from_dict(x) for x in raw) if raw is not None else tuple(default_dgps())
        try:
            return cls(
                dgps=dgps,
                sample_sizes=tuple(int(T) for T in d.get("sample_sizes", DEFAULT_SAMPLE_SIZES)),
                replications=int(d.get("replications", PROFILE_REPLICATIONS[profile])),
                levels=tuple(float(l) for l in d.get("levels", DEFAULT_LEVELS)),
                seed=int(d["seed"]),
                sd_convention=str(d.get("sd_convention", DIV_T)),
                schema_version=version,
            )
        except (TypeError, ValueError) as e:
            raise ConfigError(f"invalid config value: {e}") from None

    @classmethod
    def from_json(cls, text: str) -> "AssessmentConfig":
        try:
            return cls.from_dict(json.loads(text))
        except json.JSONDecodeError as e:
            raise ConfigError(f"config is not valid JSON: {e}") from None

    def to_dict(self) -> dict:
        return {
            "schema_version": self.schema_version,
            "dgps": [g.to_dict() for g in self.dgps],
            "sample_sizes": list(self.sample_sizes),
            "replications": self.replications,
            "levels": list(self.levels),
            "seed": self.seed,
            "sd_convention": self.sd_convention,
        }


def true_proxy_law(dgp, T: int) -> ProxyTruth:
    return dgp.truth(T)


def rmse(values, target: float) -> float:
    v = np.asarray(values, dtype=float)
    if v.size == 0:
        raise DomainError("rmse of an empty array")
    return float(np.sqrt(np.mean((v - target) ** 2)))


# ---------------------------------------------------------------------------
# vectorized core: one row of X per replication


def _step_cdf_at(truth: ProxyTruth, x: np.ndarray) -> np.ndarray:
    jumps = truth.cdf.jumps
    cum = truth.cdf._cum
    n = np.searchsorted(jumps, x, side="right")
    return np.where(n > 0, cum[np.maximum(n - 1, 0)], 0.0)


def exact_coverage(truth: ProxyTruth, lo: np.ndarray, hi: np.ndarray) -> np.ndarray:
    """``P(lo <= proxy <= hi)`` under the true law, closed on both sides."""
    if truth.is_step:
        T, p = truth.T, truth.theta0
        # atoms are k/T; the 1e-9 absorbs round-off in interval endpoints
        k_hi = np.floor(hi * T + 1e-9)
        k_lo = np.ceil(lo * T - 1e-9) - 1
        return stats.binom.cdf(k_hi, T, p) - stats.binom.cdf(k_lo, T, p)
    law = truth.limit_law
    return special.ndtr((hi - law.mean) / law.sd) - special.ndtr((lo - law.mean) / law.sd)


def _distances(truth: ProxyTruth, m: np.ndarray, sd: np.ndarray):
    """L2 and sup distances between ``N(m, sd)`` rows and the true CDF."""
    if truth.is_step:
        jumps = truth.cdf.jumps
        cum = truth.cdf._cum
        lo = np.minimum(m - L2_WIDTH * sd, jumps[0])
        hi = np.maximum(m + L2_WIDTH * sd, jumps[-1])
        base = lo[:, None] + (hi - lo)[:, None] * np.linspace(0.0, 1.0, L2_POINTS)[None, :]
        delta = 1e-12 * np.maximum(hi - lo, 1.0)
        left = jumps[None, :] - delta[:, None]
        x = np.concatenate([base, np.broadcast_to(jumps, (m.size, jumps.size)), left], axis=1)
        left_vals = np.concatenate([[0.0], cum[:-1]])
        F = np.concatenate(
            [_step_cdf_at(truth, base), np.broadcast_to(cum, (m.size, cum.size)), np.broadcast_to(left_vals, (m.size, cum.size))],
            axis=1,
        )
        order = np.argsort(x, axis=1, kind="stable")
        x = np.take_along_axis(x, order, axis=1)
        F = np.take_along_axis(F, order, axis=1)
        G = special.ndtr((x - m[:, None]) / sd[:, None])
        l2 = np.sqrt(np.trapezoid((G - F) ** 2, x, axis=1))
        # between jumps the true CDF is flat and the Gaussian monotone, so the
        # supremum is attained at a jump or its left limit
        Gj = special.ndtr((jumps[None, :] - m[:, None]) / sd[:, None])
        sup = np.maximum(np.abs(Gj - cum).max(axis=1), np.abs(Gj - left_vals).max(axis=1))
        return l2, sup
    law = truth.limit_law
    lo = np.minimum(m - L2_WIDTH * sd, law.mean - L2_WIDTH * law.sd)
    hi = np.maximum(m + L2_WIDTH * sd, law.mean + L2_WIDTH * law.sd)
    x = lo[:, None] + (hi - lo)[:, None] * np.linspace(0.0, 1.0, L2_POINTS)[None, :]
    G = special.ndtr((x - m[:, None]) / sd[:, None])
    F = special.ndtr((x - law.mean) / law.sd)
    l2 = np.sqrt(np.trapezoid((G - F) ** 2, x, axis=1))
    sup = kolmogorov_gaussian_arrays(m, sd, law.mean, law.sd)
    return l2, sup


def evaluate_samples(dgp, X: np.ndarray, levels: Sequence[float], convention: str = DIV_T) -> dict:
    """Per-replication quantities for the rows of ``X`` (shape ``(M, T)``)."""
    X = np.atleast_2d(np.asarray(X, dtype=float))
    M, T = X.shape
    if T < 2:
        raise DomainError("samples need T >= 2")
    truth = dgp.truth(T)
    xbar = X.mean(axis=1)
    sd = X.std(axis=1, ddof=0 if convention == DIV_T else 1)
    se = sd / math.sqrt(T)
    degenerate = ~(se > 0)
    l2 = np.full(M, np.nan)
    sup = np.full(M, np.nan)
    ok = ~degenerate
    if ok.any():
        l2[ok], sup[ok] = _distances(truth, xbar[ok], se[ok])
    out = {"xbar": xbar, "se": se, "degenerate": degenerate, "l2": l2, "sup": sup, "intervals": {}, "cov_unadj": {}, "cov_adj": {}}
    for level in levels:
        u = float(special.ndtri(1.0 - (1.0 - level) / 2.0))
        hw = u * se
        hw_adj = math.sqrt(2.0) * u * se
        out["intervals"][level] = ((xbar - hw, xbar + hw), (xbar - hw_adj, xbar + hw_adj))
        out["cov_unadj"][level] = exact_coverage(truth, xbar - hw, xbar + hw)
        out["cov_adj"][level] = exact_coverage(truth, xbar - hw_adj, xbar + hw_adj)
    return out


def draw_samples(dgp, T: int, seed: int, start: int, stop: int) -> np.ndarray:
    return np.stack([dgp.draw(uniforms(RngStream(seed, r), T)) for r in range(start, stop)])


@dataclass
class ReplicationRecord:
    xbar: float
    se: float
    fitted: Optional[GaussianLaw]
    degenerate: bool
    l2: float
    sup: float
    intervals_unadjusted: dict
    intervals_adjusted: dict
    coverage_unadjusted: dict
    coverage_adjusted: dict


def _record(ev: dict, i: int) -> ReplicationRecord:
    deg = bool(ev["degenerate"][i])
    xbar, se = float(ev["xbar"][i]), float(ev["se"][i])
    return ReplicationRecord(
        xbar=xbar,
        se=se,
        fitted=None if deg else GaussianLaw(xbar, se),
        degenerate=deg,
        l2=float(ev["l2"][i]),
        sup=float(ev["sup"][i]),
        intervals_unadjusted={l: (float(a[0][i]), float(a[1][i])) for l, (a, _) in ev["intervals"].items()},
        intervals_adjusted={l: (float(b[0][i]), float(b[1][i])) for l, (_, b) in ev["intervals"].items()},
        coverage_unadjusted={l: float(v[i]) for l, v in ev["cov_unadj"].items()},
        coverage_adjusted={l: float(v[i]) for l, v in ev["cov_adj"].items()},
    )


def replicate(dgp, T: int, stream: RngStream, levels: Sequence[float] = DEFAULT_LEVELS, convention: str = DIV_T) -> ReplicationRecord:
    """One replication: draw T observations from ``stream`` and assess the fit."""
    X = dgp.draw(uniforms(stream, T))[None, :]
    return _record(evaluate_samples(dgp, X, levels, convention), 0)


def replicate_sample(dgp, sample, levels: Sequence[float] = DEFAULT_LEVELS, convention: str = DIV_T) -> ReplicationRecord:
    """Assess the fit on a given sample, as if it had been drawn from ``dgp``."""
    return _record(evaluate_samples(dgp, np.asarray(sample, dtype=float)[None, :], levels, convention), 0)


# ---------------------------------------------------------------------------
# aggregation


@dataclass
class AssessmentRow:
    dgp: str
    T: int
    M: int
    rmse_mean: float
    rmse_se: float
    l2_mean: float
    sup_mean: float
    coverage_unadjusted: dict
    coverage_adjusted: dict
    mc_standard_errors: dict
    n_degenerate: int

    def to_dict(self) -> dict:
        d = asdict(self)
        for key in ("coverage_unadjusted", "coverage_adjusted"):
            d[key] = {_level_key(l): v for l, v in d[key].items()}
        for key in ("coverage_unadjusted", "coverage_adjusted"):
            d["mc_standard_errors"][key] = {_level_key(l): v for l, v in d["mc_standard_errors"][key].items()}
        return d


def _level_key(level: float) -> str:
    return f"{level:g}"


def _mean_and_se(v: np.ndarray) -> tuple[float, float]:
    if v.size == 0:
        return math.nan, math.nan
    var = float(np.var(v, ddof=1)) if v.size > 1 else 0.0
    return float(np.mean(v)), math.sqrt(var / v.size)


def _rmse_and_se(v: np.ndarray, target: float) -> tuple[float, float]:
    sq = (v - target) ** 2
    mse, se_mse = _mean_and_se(sq)
    r = math.sqrt(mse)
    # delta method: se(sqrt(mse)) = se(mse) / (2 sqrt(mse))
    return r, (se_mse / (2 * r) if r > 0 else 0.0)


def aggregate(dgp, T: int, ev: dict, levels: Sequence[float]) -> AssessmentRow:
    M = ev["xbar"].size
    ok = ~ev["degenerate"]
    r_mean, se_r_mean = _rmse_and_se(ev["xbar"], dgp.mean)
    r_se, se_r_se = _rmse_and_se(ev["se"], dgp.sd / math.sqrt(T))
    l2, se_l2 = _mean_and_se(ev["l2"][ok])
    sup, se_sup = _mean_and_se(ev["sup"][ok])
    cu, ca, se_cu, se_ca = {}, {}, {}, {}
    for level in levels:
        cu[level], se_cu[level] = _mean_and_se(ev["cov_unadj"][level])
        ca[level], se_ca[level] = _mean_and_se(ev["cov_adj"][level])
    return AssessmentRow(
        dgp=dgp.label,
        T=T,
        M=M,
        rmse_mean=r_mean,
        rmse_se=r_se,
        l2_mean=l2,
        sup_mean=sup,
        coverage_unadjusted=cu,
        coverage_adjusted=ca,
        mc_standard_errors={
            "rmse_mean": se_r_mean,
            "rmse_se": se_r_se,
            "l2_mean": se_l2,
            "sup_mean": se_sup,
            "coverage_unadjusted": se_cu,
            "coverage_adjusted": se_ca,
        },
        n_degenerate=int(np.sum(ev["degenerate"])),
    )


def _concat(parts: list[dict]) -> dict:
    out = {k: np.concatenate([p[k] for p in parts]) for k in ("xbar", "se", "degenerate", "l2", "sup")}
    for k in ("cov_unadj", "cov_adj"):
        out[k] = {l: np.concatenate([p[k][l] for p in parts]) for l in parts[0][k]}
    return out


def assess_one(dgp, T: int, cfg: AssessmentConfig, workers: int = 1) -> AssessmentRow:
    """One table row. Blocks are fixed-size and reassembled in index order,
    so the result does not depend on ``workers``."""
    M = cfg.replications
    blocks = [(a, min(a + BLOCK_SIZE, M)) for a in range(0, M, BLOCK_SIZE)]

    def work(b):
        X = draw_samples(dgp, T, cfg.seed, *b)
        ev = evaluate_samples(dgp, X, cfg.levels, cfg.sd_convention)
        ev.pop("intervals")
        return ev

    if workers > 1 and len(blocks) > 1:
        with ThreadPoolExecutor(max_workers=workers) as ex:
            parts = list(ex.map(work, blocks))
    else:
        parts = [work(b) for b in blocks]
    return aggregate(dgp, T, _concat(parts), cfg.levels)


def run_assessment(cfg: AssessmentConfig, workers: int = 1) -> list[AssessmentRow]:
    """Rows ordered by DGP then sample size."""
    if workers < 1:
        raise ConfigError("workers must be >= 1")
    return [assess_one(g, T, cfg, workers) for g in cfg.dgps for T in cfg.sample_sizes]


# ---------------------------------------------------------------------------
# serialization


def csv_header(levels: Sequence[float]) -> list[str]:
    cols = ["dgp", "T", "M", "rmse_mean", "rmse_se", "l2_mean", "sup_mean"]
    cols += [f"coverage_unadjusted_{_level_key(l)}" for l in levels]
    cols += [f"coverage_adjusted_{_level_key(l)}" for l in levels]
    cols += ["mcse_rmse_mean", "mcse_rmse_se", "mcse_l2_mean", "mcse_sup_mean"]
    cols += [f"mcse_coverage_unadjusted_{_level_key(l)}" for l in levels]
    cols += [f"mcse_coverage_adjusted_{_level_key(l)}" for l in levels]
    cols += ["n_degenerate"]
    return cols


def rows_to_csv(rows: Sequence[AssessmentRow], levels: Sequence[float]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(csv_header(levels))
    for r in rows:
        se = r.mc_standard_errors
        vals = [r.dgp, r.T, r.M, r.rmse_mean, r.rmse_se, r.l2_mean, r.sup_mean]
        vals += [r.coverage_unadjusted[l] for l in levels]
        vals += [r.coverage_adjusted[l] for l in levels]
        vals += [se["rmse_mean"], se["rmse_se"], se["l2_mean"], se["sup_mean"]]
        vals += [se["coverage_unadjusted"][l] for l in levels]
        vals += [se["coverage_adjusted"][l] for l in levels]
        vals += [r.n_degenerate]
        w.writerow([v if isinstance(v, str) else fmt_number(v) for v in vals])
    return buf.getvalue()


def rows_to_json(rows: Sequence[AssessmentRow], cfg: Optional[AssessmentConfig] = None) -> str:
    doc = {"rows": [r.to_dict() for r in rows]}
    if cfg is not None:
        doc["config"] = cfg.to_dict()
    return json.dumps(doc, indent=2, allow_nan=True)
