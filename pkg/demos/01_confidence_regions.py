"""From a sample to an estimate, a highest-density region and a test.

Run with ``python3 demos/01_confidence_regions.py``.
"""

import numpy as np
from scipy.special import ndtri

from neoclassical.adjustment import adjusted_interval, unadjusted_interval
from neoclassical.approximations import criterion_adjusted_calibration, gaussian_approx, gaussian_density
from neoclassical.distributions import RngStream, uniforms
from neoclassical.inference import hpd_region, mode_estimate, neoclassical_test
from neoclassical.objectives import build_criterion

# 100 draws from N(0, .2), generated from a reproducible stream
x = 0.2 * ndtri(uniforms(RngStream(7), 100))

law = gaussian_approx(x)
print(f"fitted proxy law: N({law.mean:.4f}, {law.sd:.4f}^2)")

grid = np.linspace(law.mean - 8 * law.sd, law.mean + 8 * law.sd, 4001)
d = gaussian_density(law, grid)
print(f"mode of the fitted density: {mode_estimate(d):.4f}")

for alpha in (0.32, 0.05):
    lo, hi = hpd_region(d, alpha).intervals[0]
    print(f"{1 - alpha:.0%} highest-density region: [{lo:.4f}, {hi:.4f}]")
    print("    plain interval   [{:.4f}, {:.4f}]".format(*unadjusted_interval(law.mean, law.sd, alpha)))
    print("    sqrt(2) widened  [{:.4f}, {:.4f}]".format(*adjusted_interval(law.mean, law.sd, alpha)))

for theta in (0.0, 0.1):
    print(f"test of theta = {theta}: {neoclassical_test(d, 0.05, theta).decision.value}")

# calibration: a criterion centred on a chosen value spreads the unit mass out
u = build_criterion("gaussian-kernel", {"tau": 0.05})
c = criterion_adjusted_calibration(u, 0.02, np.linspace(-0.3, 0.3, 1201))
lo, hi = hpd_region(c, 0.05).intervals[0]
print(f"95% region from the criterion around 0.02: [{lo:.3f}, {hi:.3f}]")
