"""Command-line front end.

Subcommands: ``infer``, ``assess``, ``tables``, ``adjust``, ``distance`` and
``proxy-curves``. Exit codes: 0 success, 2 configuration error, 3 ingestion
error, 4 numeric degeneracy.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
from pathlib import Path
from typing import Any, Optional

import numpy as np
from scipy import special

from . import adjustment, montecarlo
from .approximations import (
    DIV_T,
    DIV_TM1,
    criterion_adjusted_calibration,
    criterion_adjusted_laplace,
    gaussian_approx,
    gaussian_density,
    laplace_approx,
    plain_calibration,
)
from .distributions import GaussianLaw, RngStream, uniforms
from .errors import ConfigError, DegenerateInputError, IngestionError, NeoclassicalError
from .fileio import atomic_write_text, check_writable, fmt_number, read_column
from .inference import hpd_region, mode_estimate, neoclassical_test
from .metrics import (
    DistanceReport,
    ProxyTruth,
    binomial_mean_truth,
    distance_report,
    effective_grid,
    gaussian_mean_truth,
    hellinger_gaussian,
    kolmogorov_gaussian_exact,
    l2_cdf_distance,
    wasserstein1_numeric,
    wasserstein2_gaussian,
)
from .objectives import ObjectiveSpec, build_criterion, build_objective

EXIT_OK, EXIT_CONFIG, EXIT_INGEST, EXIT_DEGENERATE = 0, 2, 3, 4
APPROXIMATIONS = ("gaussian", "calibration", "criterion-calibration", "laplace", "criterion-laplace")
TABLE_ALPHAS = (0.01, 0.05, 0.1, 0.32)
TABLE_CRITICAL = (2.58, 1.96, 1.64, 0.99)
CURVE_POINTS = 512


# ---------------------------------------------------------------------------
# parsing helpers


def parse_grid(text: str) -> np.ndarray:
    """``lo:hi:n`` with ``n`` odd and at least 101."""
    try:
        lo, hi, n = text.split(":")
        lo, hi, n = float(lo), float(hi), int(n)
    except ValueError:
        raise ConfigError(f"--grid expects lo:hi:n, got {text!r}") from None
    return make_grid(lo, hi, n)


def make_grid(lo: float, hi: float, n: int) -> np.ndarray:
    if not (math.isfinite(lo) and math.isfinite(hi) and lo < hi):
        raise ConfigError("grid needs finite lo < hi")
    if n < 101 or n % 2 == 0:
        raise ConfigError(f"grid points must be odd and >= 101, got {n}")
    return np.linspace(lo, hi, n)


def parse_floats(text: str, what: str) -> list[float]:
    try:
        return [float(v) for v in str(text).split(",") if v.strip()]
    except ValueError:
        raise ConfigError(f"{what}: expected comma-separated numbers, got {text!r}") from None


def parse_alphas(text) -> list[float]:
    alphas = parse_floats(text, "--alpha") if isinstance(text, str) else [float(a) for a in text]
    if not alphas or any(not 0.0 < a < 1.0 for a in alphas):
        raise ConfigError("alpha values must lie in (0, 1)")
    return alphas


def load_json(path: Optional[str]) -> dict:
    if path is None:
        return {}
    try:
        doc = json.loads(Path(path).read_text())
    except OSError as e:
        raise ConfigError(f"cannot read config {path}: {e.strerror}") from None
    except json.JSONDecodeError as e:
        raise ConfigError(f"config {path} is not valid JSON: {e}") from None
    if not isinstance(doc, dict):
        raise ConfigError("config must be a JSON object")
    version = doc.get("schema_version", 1)
    if version != 1:
        raise ConfigError(f"schema_version: unsupported value {version!r}")
    return doc


def resolve_seed(flag: Optional[int], config_value: Any) -> Optional[int]:
    """Flag beats NEO_SEED, which beats the config file."""
    if flag is not None:
        return flag
    env = os.environ.get("NEO_SEED")
    if env is not None and env.strip():
        try:
            return int(env)
        except ValueError:
            raise ConfigError(f"NEO_SEED must be an integer, got {env!r}") from None
    return None if config_value is None else int(config_value)


def emit(text: str, out: Optional[str]) -> None:
    if out is None or out == "-":
        sys.stdout.write(text)
    else:
        atomic_write_text(out, text)


def to_json(doc) -> str:
    return json.dumps(doc, indent=2, allow_nan=True) + "\n"


def rows_to_csv(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow([v if isinstance(v, str) else fmt_number(v) for v in r])
    return buf.getvalue()


# ---------------------------------------------------------------------------
# infer


def infer_report(x: np.ndarray, cfg: dict) -> dict:
    """Estimate, HPD regions, tests and (for the Gaussian approximation) side-by-side intervals."""
    approx = cfg.get("approx", "gaussian")
    if approx not in APPROXIMATIONS:
        raise ConfigError(f"approx: expected one of {APPROXIMATIONS}, got {approx!r}")
    alphas = parse_alphas(cfg.get("alpha", [0.05]))
    convention = cfg.get("sd_convention", DIV_T)
    if convention not in (DIV_T, DIV_TM1):
        raise ConfigError("sd_convention must be 'T' or 'T-1'")
    T = x.size
    xbar = float(np.mean(x))
    theta_star = float(cfg.get("theta_star", xbar))

    grid = cfg.get("grid")
    if isinstance(grid, str):
        grid = parse_grid(grid)
    elif isinstance(grid, dict):
        try:
            grid = make_grid(float(grid["lo"]), float(grid["hi"]), int(grid["points"]))
        except KeyError as e:
            raise ConfigError(f"grid.{e.args[0]}: missing field") from None

    report: dict[str, Any] = {"approx": approx, "T": T, "sample_mean": xbar}
    law = None
    if approx == "calibration":
        d = plain_calibration(theta_star)
    elif approx == "gaussian":
        law = gaussian_approx(x, convention)
        if grid is None:
            grid = np.linspace(law.mean - 8 * law.sd, law.mean + 8 * law.sd, 4001)
        d = gaussian_density(law, grid)
        report["fitted"] = {"mean": law.mean, "sd": law.sd}
    else:
        if grid is None:
            raise ConfigError(f"approx {approx!r} needs a grid (--grid lo:hi:n)")
        if approx == "criterion-calibration":
            crit = cfg.get("criterion", {"name": "gaussian-kernel", "params": {}})
            d = criterion_adjusted_calibration(build_criterion(crit.get("name"), crit.get("params")), theta_star, grid)
        else:
            obj = build_objective(ObjectiveSpec.from_dict(cfg.get("objective", {"name": "gaussian-loglik"})))
            if approx == "laplace":
                d = laplace_approx(obj, x, grid)
            else:
                crit = cfg.get("criterion", {"name": "gaussian-kernel", "params": {}})
                d = criterion_adjusted_laplace(build_criterion(crit.get("name"), crit.get("params")), obj, x, grid)

    report["estimate"] = mode_estimate(d)
    report["regions"] = []
    for a in alphas:
        r = hpd_region(d, a)
        report["regions"].append(
            {"alpha": a, "threshold": r.threshold, "achieved_mass": r.achieved_mass, "intervals": [list(iv) for iv in r.intervals]}
        )
    thetas = cfg.get("theta_dot", [])
    if isinstance(thetas, str):
        thetas = parse_floats(thetas, "--theta-dot")
    report["tests"] = []
    for a in alphas:
        for t in thetas:
            td = neoclassical_test(d, a, float(t))
            report["tests"].append(
                {"alpha": a, "theta_dot": td.tested_value, "decision": td.decision.value, "snapped_value": td.snapped_value, "out_of_support": td.out_of_support}
            )
    if law is not None:
        report["intervals"] = [
            {
                "alpha": a,
                "unadjusted": list(adjustment.unadjusted_interval(law.mean, law.sd, a)),
                "adjusted": list(adjustment.adjusted_interval(law.mean, law.sd, a)),
            }
            for a in alphas
        ]
    return report


def infer_csv(report: dict) -> str:
    rows = [("estimate", "", "", report["estimate"], "")]
    for r in report["regions"]:
        for lo, hi in r["intervals"]:
            rows.append(("region", r["alpha"], lo, hi, r["achieved_mass"]))
    for iv in report.get("intervals", []):
        rows.append(("unadjusted", iv["alpha"], *iv["unadjusted"], ""))
        rows.append(("adjusted", iv["alpha"], *iv["adjusted"], ""))
    for t in report["tests"]:
        rows.append(("test", t["alpha"], t["theta_dot"], "", t["decision"]))
    return rows_to_csv(("record", "alpha", "lower", "upper", "extra"), rows)


def cmd_infer(args) -> int:
    cfg = load_json(args.config)
    for key, val in (("approx", args.approx), ("alpha", args.alpha), ("grid", args.grid), ("theta_dot", args.theta_dot), ("theta_star", args.theta_star), ("sd_convention", args.sd_convention)):
        if val is not None:
            cfg[key] = val
    if args.out:
        check_writable(args.out)
    x = read_column(args.data, header=args.header, column=args.column)
    report = infer_report(x, cfg)
    emit(to_json(report) if args.format == "json" else infer_csv(report), args.out)
    return EXIT_OK


# ---------------------------------------------------------------------------
# assess


def cmd_assess(args) -> int:
    doc = load_json(args.config)
    if args.profile is not None:
        doc["profile"] = args.profile
    if args.replications is not None:
        doc["replications"] = args.replications
    seed = resolve_seed(args.seed, doc.get("seed"))
    if seed is not None:
        doc["seed"] = seed
    cfg = montecarlo.AssessmentConfig.from_dict(doc)
    if args.out:
        check_writable(args.out)
    rows = montecarlo.run_assessment(cfg, workers=args.workers)
    text = montecarlo.rows_to_csv(rows, cfg.levels) if args.format == "csv" else montecarlo.rows_to_json(rows, cfg) + "\n"
    emit(text, args.out)
    return EXIT_OK


# ---------------------------------------------------------------------------
# tables


def conversion_tables() -> dict[str, str]:
    """CSV text of the three conversion tables and the level-conversion curve."""
    n2a = rows_to_csv(("nominal_level", "adjusted_nominal_level"), [(a, adjustment.nominal_to_adjusted(a)) for a in TABLE_ALPHAS])
    a2n = rows_to_csv(("adjusted_nominal_level", "nominal_level"), [(a, adjustment.adjusted_to_nominal(a)) for a in TABLE_ALPHAS])
    crit = rows_to_csv(("critical_value", "adjusted_critical_value"), [(c, adjustment.adjust_critical_value(c)) for c in TABLE_CRITICAL])
    curve = adjustment.conversion_curve(n=CURVE_POINTS)
    fig = rows_to_csv(("nominal_level", "adjusted_nominal_level"), curve.tolist())
    return {"nominal_to_adjusted.csv": n2a, "adjusted_to_nominal.csv": a2n, "critical_values.csv": crit, "level_curve.csv": fig}


def cmd_tables(args) -> int:
    files = conversion_tables()
    if args.out is None:
        for name, text in files.items():
            sys.stdout.write(f"# {name}\n{text}")
        return EXIT_OK
    out = Path(args.out)
    check_writable(out / "x")
    for name, text in files.items():
        atomic_write_text(out / name, text)
    return EXIT_OK


# ---------------------------------------------------------------------------
# adjust


def cmd_adjust(args) -> int:
    if args.kind == "se":
        if not args.value >= 0:
            raise ConfigError("standard error must be >= 0")
        v = adjustment.SQRT2 * args.value
    elif args.kind == "pvalue":
        v = adjustment.nominal_to_adjusted(args.value)
    else:
        v = adjustment.adjust_critical_value(args.value)
    sys.stdout.write(fmt_number(v) + "\n")
    return EXIT_OK


# ---------------------------------------------------------------------------
# distance


def parse_law(text: str, args) -> Any:
    """``normal:MEAN:SD``, ``gaussian-mean:THETA0:S:T``, ``binomial-mean:T:P`` or ``fit:PATH``."""
    kind, _, rest = text.partition(":")
    parts = rest.split(":") if rest else []
    try:
        if kind == "normal" and len(parts) == 2:
            return GaussianLaw(float(parts[0]), float(parts[1]))
        if kind == "gaussian-mean" and len(parts) == 3:
            return gaussian_mean_truth(float(parts[0]), float(parts[1]), int(parts[2]))
        if kind == "binomial-mean" and len(parts) == 2:
            return binomial_mean_truth(int(parts[0]), float(parts[1]))
    except (ValueError, NeoclassicalError) as e:
        raise ConfigError(f"bad law {text!r}: {e}") from None
    if kind == "fit" and rest:
        return gaussian_approx(read_column(rest, header=args.header, column=args.column), args.sd_convention or DIV_T)
    raise ConfigError(f"bad law {text!r}; use normal:M:SD, gaussian-mean:THETA0:S:T, binomial-mean:T:P or fit:PATH")


def distance_between(a, b) -> DistanceReport:
    if isinstance(a, ProxyTruth) and isinstance(b, GaussianLaw):
        a, b = b, a
    if isinstance(a, ProxyTruth):
        if a.is_step:
            raise ConfigError("compare a step law with a Gaussian, not with another proxy truth")
        a = a.limit_law
    if isinstance(b, ProxyTruth):
        return distance_report(a, b)
    grid = effective_grid(a, b)
    Fa, Fb = a.to_cdf(), b.to_cdf()
    return DistanceReport(
        l2_cdf=l2_cdf_distance(Fa, Fb, grid),
        sup_cdf=kolmogorov_gaussian_exact(a, b),
        hellinger=hellinger_gaussian(a, b),
        wasserstein2=wasserstein2_gaussian(a, b),
        wasserstein1=wasserstein1_numeric(Fa, Fb, grid),
    )


def cmd_distance(args) -> int:
    if args.out:
        check_writable(args.out)
    rep = distance_between(parse_law(args.law_a, args), parse_law(args.law_b, args))
    emit(to_json(rep.to_dict()), args.out)
    return EXIT_OK


# ---------------------------------------------------------------------------
# proxy-curves


def proxy_curves(theta0: float, s: float, T: int, k: int, seed: int, alpha: float, points: int):
    """True proxy density and ``k`` seeded fitted densities on a common grid."""
    truth = GaussianLaw(theta0, s / math.sqrt(T))
    fits = [gaussian_approx(theta0 + s * np.asarray(uniforms_normal(seed, i, T))) for i in range(k)]
    lo = min([truth.mean - 5 * truth.sd] + [f.mean - 5 * f.sd for f in fits])
    hi = max([truth.mean + 5 * truth.sd] + [f.mean + 5 * f.sd for f in fits])
    grid = np.linspace(lo, hi, points)
    cols = [grid, truth.pdf(grid)] + [f.pdf(grid) for f in fits]
    regions = {
        "alpha": alpha,
        "true": list(adjustment.unadjusted_interval(truth.mean, truth.sd, alpha)),
        "fitted": [
            {
                "mean": f.mean,
                "sd": f.sd,
                "unadjusted": list(adjustment.unadjusted_interval(f.mean, f.sd, alpha)),
                "adjusted": list(adjustment.adjusted_interval(f.mean, f.sd, alpha)),
            }
            for f in fits
        ],
    }
    return np.column_stack(cols), regions


def uniforms_normal(seed: int, i: int, T: int) -> np.ndarray:
    return special.ndtri(uniforms(RngStream(seed, i), T))


def cmd_proxy_curves(args) -> int:
    seed = resolve_seed(args.seed, 0)
    if args.T < 2 or args.k < 1 or not args.s > 0:
        raise ConfigError("need T >= 2, k >= 1 and s > 0")
    if args.points < 101 or args.points % 2 == 0:
        raise ConfigError("points must be odd and >= 101")
    alpha = parse_alphas(args.alpha)[0]
    table, regions = proxy_curves(args.theta0, args.s, args.T, args.k, seed, alpha, args.points)
    header = ["theta", "f_true"] + [f"f_fit_{i + 1}" for i in range(args.k)]
    text = rows_to_csv(header, table.tolist())
    if args.out is None:
        sys.stdout.write(text)
        sys.stdout.write(to_json(regions))
        return EXIT_OK
    check_writable(args.out)
    atomic_write_text(args.out, text)
    atomic_write_text(Path(args.out).with_suffix(".regions.json"), to_json(regions))
    return EXIT_OK


# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="neoclassical", description="Inference from approximations of the law of a generic proxy.")
    sub = p.add_subparsers(dest="command", required=True)

    def data_opts(q):
        q.add_argument("--header", action="store_true", help="first CSV row holds column names")
        q.add_argument("--column", help="column name (with --header) or 0-based index")

    q = sub.add_parser("infer", help="estimate, HPD regions and tests from a data file")
    q.add_argument("data")
    q.add_argument("--config")
    q.add_argument("--approx", choices=APPROXIMATIONS)
    q.add_argument("--alpha")
    q.add_argument("--grid")
    q.add_argument("--theta-dot", dest="theta_dot", help="comma-separated tested values")
    q.add_argument("--theta-star", dest="theta_star", type=float, help="calibrated value (default: sample mean)")
    q.add_argument("--sd-convention", dest="sd_convention", choices=(DIV_T, DIV_TM1))
    q.add_argument("--format", choices=("json", "csv"), default="json")
    q.add_argument("--out")
    data_opts(q)
    q.set_defaults(func=cmd_infer)

    q = sub.add_parser("assess", help="Monte-Carlo assessment of Gaussian approximations")
    q.add_argument("config", nargs="?")
    q.add_argument("--seed", type=int)
    q.add_argument("--replications", type=int)
    q.add_argument("--profile", choices=tuple(montecarlo.PROFILE_REPLICATIONS))
    q.add_argument("--workers", type=int, default=1)
    q.add_argument("--format", choices=("csv", "json"), default="csv")
    q.add_argument("--out")
    q.set_defaults(func=cmd_assess)

    q = sub.add_parser("tables", help="level and critical-value conversion tables")
    q.add_argument("--out", help="output directory")
    q.set_defaults(func=cmd_tables)

    q = sub.add_parser("adjust", help="adjust a standard error, p-value level or critical value")
    q.add_argument("kind", choices=("se", "pvalue", "tstat"))
    q.add_argument("value", type=float)
    q.set_defaults(func=cmd_adjust)

    q = sub.add_parser("distance", help="distances between two laws")
    q.add_argument("law_a", metavar="LAW_A")
    q.add_argument("law_b", metavar="LAW_B")
    q.add_argument("--sd-convention", dest="sd_convention", choices=(DIV_T, DIV_TM1))
    q.add_argument("--out")
    data_opts(q)
    q.set_defaults(func=cmd_distance)

    q = sub.add_parser("proxy-curves", help="true and fitted proxy densities for plotting")
    q.add_argument("--theta0", type=float, default=0.0)
    q.add_argument("--s", type=float, default=0.4)
    q.add_argument("--T", type=int, default=20)
    q.add_argument("--k", type=int, default=2)
    q.add_argument("--seed", type=int)
    q.add_argument("--alpha", default="0.05")
    q.add_argument("--points", type=int, default=801)
    q.add_argument("--out")
    q.set_defaults(func=cmd_proxy_curves)
    return p


def main(argv: Optional[list[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except IngestionError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_INGEST
    except DegenerateInputError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_DEGENERATE
    except NeoclassicalError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_CONFIG
    except BrokenPipeError:
        # downstream reader closed early (e.g. piped into head)
        sys.stderr.close()
        return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
