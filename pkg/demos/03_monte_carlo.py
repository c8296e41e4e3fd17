"""A small coverage study of the Gaussian proxy approximation.

Uses a reduced number of replications so it runs in a few seconds; the
``assess`` subcommand of the CLI runs the full design.
Run with ``python3 demos/03_monte_carlo.py``.
"""

from neoclassical.adjustment import asymptotic_unadjusted_coverage
from neoclassical.montecarlo import AssessmentConfig, default_dgps, run_assessment

cfg = AssessmentConfig(dgps=tuple(default_dgps()), sample_sizes=(20, 100), replications=2000, seed=11)
rows = run_assessment(cfg, workers=4)

print(f"{'law':<22}{'T':>5}{'RMSE':>8}{'sup':>7}   plain / widened coverage at .68 .90 .95 .99")
for r in rows:
    plain = " ".join(f"{r.coverage_unadjusted[l]:.3f}" for l in cfg.levels)
    wide = " ".join(f"{r.coverage_adjusted[l]:.3f}" for l in cfg.levels)
    print(f"{r.dgp:<22}{r.T:>5}{r.rmse_mean:>8.3f}{r.sup_mean:>7.3f}   {plain} / {wide}")

limit = " ".join(f"{asymptotic_unadjusted_coverage(1 - l):.3f}" for l in cfg.levels)
print(f"\nplain coverage as T grows: {limit}")
