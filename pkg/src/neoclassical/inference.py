"""Maximum-density estimate, highest-density confidence region and test.

On a grid the threshold ``k`` of the level set ``{f >= k}`` is found by
sorting point masses by decreasing density and scanning the cumulative mass;
the supremum over ``k`` is attained at one of the density values.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .distributions import COUNTING, Density1D
from .errors import AlignmentError, DomainError

# absorbs round-off in cumulative sums when comparing against 1 - alpha
_MASS_EPS = 1e-12


class Decision(str, enum.Enum):
    NOT_REJECTED = "d_H"
    REJECTED = "d_A"


@dataclass(frozen=True, eq=False)
class ConfidenceRegion:
    """Level set ``{f >= threshold}`` of a density, stored as a mask over its points."""

    level: float
    threshold: float
    points: np.ndarray
    mask: np.ndarray
    measure: str
    achieved_mass: float

    @property
    def members(self) -> np.ndarray:
        return self.points[self.mask]

    @property
    def is_empty(self) -> bool:
        return not bool(self.mask.any())

    @property
    def intervals(self) -> list[tuple[float, float]]:
        """Maximal runs of member grid points as closed intervals, sorted.

        For atomic densities every atom is its own degenerate interval.
        """
        if self.measure == COUNTING:
            return [(float(a), float(a)) for a in self.members]
        m = self.mask.astype(np.int8)
        edges = np.diff(np.concatenate([[0], m, [0]]))
        starts = np.flatnonzero(edges == 1)
        stops = np.flatnonzero(edges == -1) - 1
        return [(float(self.points[a]), float(self.points[b])) for a, b in zip(starts, stops)]

    def width(self) -> float:
        """Total length of the member intervals (0 for atoms)."""
        return float(sum(b - a for a, b in self.intervals))


@dataclass(frozen=True)
class TestDecision:
    decision: Decision
    tested_value: float
    region: ConfidenceRegion
    snapped_value: float | None = None
    out_of_support: bool = False

    @property
    def rejected(self) -> bool:
        return self.decision is Decision.REJECTED


def _check_alpha(alpha: float) -> float:
    alpha = float(alpha)
    if not 0.0 <= alpha <= 1.0:
        raise DomainError(f"alpha must lie in [0, 1], got {alpha!r}")
    return alpha


def mode_estimate(d: Density1D) -> float:
    """Point of maximal density; ties go to the smallest point."""
    return float(d.points[int(np.argmax(d.values))])


def hpd_threshold(d: Density1D, alpha: float) -> float:
    """Largest density level ``k`` whose super-level set carries mass >= 1 - alpha.

    ``alpha = 0`` gives the smallest positive density (the whole support);
    ``alpha = 1`` gives ``max f + 1`` (the empty region).
    """
    alpha = _check_alpha(alpha)
    f = d.values
    if alpha == 1.0:
        return float(f.max() + 1.0)
    if alpha == 0.0:
        return float(f[f > 0].min())
    order = np.argsort(-f, kind="stable")
    cum = np.cumsum(d.masses[order])
    i = int(np.searchsorted(cum, (1.0 - alpha) - _MASS_EPS, side="left"))
    return float(f[order[min(i, f.size - 1)]])


def hpd_region(d: Density1D, alpha: float) -> ConfidenceRegion:
    """Highest-density region of level ``1 - alpha``.

    Every point with density equal to the threshold is included, so the mass
    may overshoot ``1 - alpha``.
    """
    k = hpd_threshold(d, alpha)
    mask = (d.values >= k) & (d.values > 0)
    return ConfidenceRegion(
        level=1.0 - float(alpha),
        threshold=k,
        points=d.points,
        mask=mask,
        measure=d.measure,
        achieved_mass=float(np.sum(d.masses[mask])),
    )


def region_mass(d: Density1D, region: ConfidenceRegion) -> float:
    """Mass that ``d`` puts on the region's member points."""
    if region.points.shape != d.points.shape or not np.array_equal(region.points, d.points):
        members = region.members
        idx = np.searchsorted(d.points, members)
        ok = (idx < d.points.size) & np.isclose(d.points[np.clip(idx, 0, d.points.size - 1)], members, rtol=0, atol=1e-12)
        if not np.all(ok):
            raise AlignmentError("region members are not points of the density's grid")
        return float(np.sum(d.masses[idx]))
    return float(np.sum(d.masses[region.mask]))


def grid_epsilon(d: Density1D) -> float:
    """Grid-resolution slack ``2 h max f`` on region masses (0 for atoms)."""
    return 2.0 * d.spacing * float(d.values.max())


def neoclassical_test(d: Density1D, alpha: float, theta_dot: float) -> TestDecision:
    """Do not reject ``theta_0 = theta_dot`` iff it lies in the HPD region.

    Off-grid values snap to the nearest grid point; values beyond half a
    cell outside the grid, or not matching any atom, are rejected and flagged.
    """
    region = hpd_region(d, alpha)
    pts = d.points
    if d.measure == COUNTING:
        hit = np.flatnonzero(np.isclose(pts, theta_dot, rtol=1e-12, atol=1e-12))
        if hit.size == 0:
            return TestDecision(Decision.REJECTED, float(theta_dot), region, None, True)
        i = int(hit[0])
    else:
        h = d.spacing
        if theta_dot < pts[0] - h / 2 or theta_dot > pts[-1] + h / 2:
            return TestDecision(Decision.REJECTED, float(theta_dot), region, None, True)
        i = int(np.clip(np.rint((theta_dot - pts[0]) / h), 0, pts.size - 1))
    decision = Decision.NOT_REJECTED if region.mask[i] else Decision.REJECTED
    return TestDecision(decision, float(theta_dot), region, float(pts[i]), False)
