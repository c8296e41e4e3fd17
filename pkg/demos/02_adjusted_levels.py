"""How much the sqrt(2) widening changes levels, p-values and critical values.

Run with ``python3 demos/02_adjusted_levels.py``.
"""

from neoclassical.adjustment import (
    adjust_critical_value,
    adjusted_to_nominal,
    asymptotic_unadjusted_coverage,
    nominal_to_adjusted,
)

print("alpha   plain->widened   widened->plain   plain coverage in the limit")
for a in (0.01, 0.05, 0.1, 0.32):
    print(f"{a:<7} {nominal_to_adjusted(a):<16.4f} {adjusted_to_nominal(a):<16.3g} {asymptotic_unadjusted_coverage(a):.4f}")

print()
print("critical values")
for c in (2.576, 1.96, 1.645, 1.0):
    print(f"  {c:<6} -> {adjust_critical_value(c):.3f}")
