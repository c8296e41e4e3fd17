import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate

from neoclassical.approximations import (
    DIV_TM1,
    ObjectiveFn,
    criterion_adjusted_calibration,
    criterion_adjusted_laplace,
    gaussian_approx,
    gaussian_approx_mv,
    gaussian_density,
    laplace_approx,
    plain_calibration,
    sample_mean,
    sample_sd,
)
from neoclassical.distributions import COUNTING, GaussianLaw, RngStream, gaussian_cdf, gaussian_pdf, gaussian_quantile, uniforms
from neoclassical.errors import CovarianceError, DegenerateInputError, DomainError, ObjectiveError
from neoclassical.inference import hpd_region, mode_estimate
from neoclassical.metrics import kolmogorov_gaussian_exact, wasserstein2_gaussian
from neoclassical.objectives import build_criterion


def test_sample_mean():
    assert sample_mean([1, 2, 3]) == 2
    assert sample_mean([4.5] * 7) == 4.5
    assert sample_mean([0, 1]) == 0.5


def test_sample_sd():
    assert sample_sd([1, 2, 3]) == pytest.approx(math.sqrt(2 / 3))
    assert sample_sd([1, 2, 3], DIV_TM1) == pytest.approx(1.0)
    assert sample_sd([3.0, 3.0]) == 0.0
    assert sample_sd([3.0, 3.0], DIV_TM1) == 0.0


def test_sample_validation():
    with pytest.raises(DomainError):
        sample_mean([1.0])
    with pytest.raises(DomainError):
        sample_mean([1.0, float("nan")])


def test_gaussian_approx():
    law = gaussian_approx([1, 2, 3])
    assert law.mean == 2
    assert law.sd == pytest.approx(math.sqrt(2 / 3) / math.sqrt(3))
    with pytest.raises(DegenerateInputError):
        gaussian_approx([5, 5, 5])


def test_gaussian_approx_standard_error_scale():
    # data from N(0, .2), T = 100: the standard error sits near .02
    x = 0.2 * gaussian_quantile(uniforms(RngStream(3, 0), 100))
    assert gaussian_approx(x).sd == pytest.approx(0.02, rel=0.2)


def test_gaussian_approx_mv():
    (law,) = gaussian_approx_mv([0.0], [[1.0]], 100)
    assert (law.mean, law.sd) == (0.0, pytest.approx(0.1))
    a, b = gaussian_approx_mv([1, 2], [[4, 0.3], [0.3, 9]], 25)
    assert (a.mean, a.sd, b.mean, b.sd) == (1, pytest.approx(0.4), 2, pytest.approx(0.6))
    with pytest.raises(CovarianceError):
        gaussian_approx_mv([0, 0], [[1, 0], [0, 0]], 10)
    with pytest.raises(CovarianceError):
        gaussian_approx_mv([0, 0], [[1]], 10)


def test_plain_calibration():
    d = plain_calibration(2.5)
    assert d.measure == COUNTING
    assert list(d.points) == [2.5] and list(d.values) == [1.0]
    assert mode_estimate(d) == 2.5
    r = hpd_region(d, 0.05)
    assert list(r.members) == [2.5] and r.achieved_mass == 1.0


def test_criterion_adjusted_calibration_indicator():
    grid = np.linspace(-1, 1, 201)
    u = build_criterion("indicator", {"half_width": 0.5 + 1e-9})
    d = criterion_adjusted_calibration(u, 0.0, grid)
    inside = np.abs(grid) <= 0.5 + 1e-9
    # all 101 members are interior grid points, each carrying weight h
    h = grid[1] - grid[0]
    assert np.allclose(d.values[inside], 1.0 / (inside.sum() * h))
    assert np.all(d.values[~inside] == 0)


def test_criterion_adjusted_calibration_gaussian_kernel():
    grid = np.linspace(-8, 8, 1601)
    d = criterion_adjusted_calibration(build_criterion("gaussian-kernel", {"tau": 1.0}), 0.0, grid)
    assert np.max(np.abs(d.values - gaussian_pdf(grid))) < 1e-10


def test_criterion_adjusted_calibration_degenerate():
    grid = np.linspace(-1, 1, 21)
    u = build_criterion("indicator", {"half_width": 0.5})
    with pytest.raises(DegenerateInputError):
        criterion_adjusted_calibration(u, 10.0, grid)
    with pytest.raises(ObjectiveError):
        criterion_adjusted_calibration(lambda a, b: a - b, 0.0, grid)


def _gauss_obj(sigma):
    return ObjectiveFn(lambda s, t: -((t - s.mean()) ** 2) / (2 * sigma**2))


def test_laplace_gaussian_objective_matches_normal():
    x = 0.3 + gaussian_quantile(uniforms(RngStream(8, 0), 50))
    T, xbar = x.size, x.mean()
    grid = np.linspace(xbar - 8 / math.sqrt(T), xbar + 8 / math.sqrt(T), 2001)
    d = laplace_approx(_gauss_obj(1.0), x, grid)
    exact = gaussian_pdf(grid, GaussianLaw(xbar, 1 / math.sqrt(T)))
    assert np.max(np.abs(d.values - exact)) <= 1e-6


def test_laplace_large_T_no_overflow():
    x = gaussian_quantile(uniforms(RngStream(8, 1), 5000))
    grid = np.linspace(-1, 1, 801)
    d = laplace_approx(ObjectiveFn(lambda s, t: -50.0 - (t - s.mean()) ** 2), x, grid)
    assert np.all(np.isfinite(d.values))


def test_laplace_truncated_weight():
    x = np.array([0.1, 0.5, -0.2, 0.4, 0.3])
    sigma, T = 1.0, 5
    sd = sigma / math.sqrt(T)
    grid = np.linspace(-2, 3, 5001)
    h = grid[1] - grid[0]
    obj = ObjectiveFn(lambda s, t: -((t - s.mean()) ** 2) / (2 * sigma**2), weight=lambda t: (t >= 0).astype(float))
    d = laplace_approx(obj, x, grid)
    kernel = lambda t: math.exp(-((t - x.mean()) ** 2) / (2 * sd**2))
    z = integrate.quad(kernel, 0, 3, epsabs=1e-14)[0]
    exact = np.where(grid >= 0, np.exp(-((grid - x.mean()) ** 2) / (2 * sd**2)) / z, 0.0)
    assert np.max(np.abs(d.values - exact)) <= 2 * h * exact.max() ** 2
    assert np.all(d.values[grid < 0] == 0)


def test_laplace_flat_objective_uniform():
    grid = np.linspace(0, 2, 51)
    d = laplace_approx(ObjectiveFn(lambda s, t: np.zeros_like(t)), [1.0, 2.0], grid)
    assert np.allclose(d.values, 0.5)


def test_laplace_errors():
    grid = np.linspace(0, 1, 11)
    with pytest.raises(DegenerateInputError):
        laplace_approx(ObjectiveFn(lambda s, t: np.full_like(t, -np.inf)), [1.0, 2.0], grid)
    with pytest.raises(ObjectiveError):
        laplace_approx(ObjectiveFn(lambda s, t: np.full_like(t, np.nan)), [1.0, 2.0], grid)
    with pytest.raises(DegenerateInputError):
        laplace_approx(ObjectiveFn(lambda s, t: t, weight=lambda t: np.zeros_like(t)), [1.0, 2.0], grid)


def test_criterion_adjusted_laplace_delta_recovers_laplace():
    x = np.array([0.2, -0.1, 0.4, 0.0])
    grid = np.linspace(-2, 2, 801)
    h = grid[1] - grid[0]
    plain = laplace_approx(_gauss_obj(1.0), x, grid)
    delta = lambda a, b: (np.abs(a - b) <= h / 2).astype(float)
    d = criterion_adjusted_laplace(delta, _gauss_obj(1.0), x, grid)
    assert np.max(np.abs(d.values - plain.values)) <= h * plain.values.max()


def test_criterion_adjusted_laplace_gaussian_convolution():
    x = np.array([0.2, -0.1, 0.4, 0.0, 0.3, 0.1])
    sigma, tau, T = 1.0, 0.3, 6
    sd = math.sqrt(sigma**2 / T + tau**2)
    grid = np.linspace(x.mean() - 9 * sd, x.mean() + 9 * sd, 1201)
    u = build_criterion("gaussian-kernel", {"tau": tau})
    d = criterion_adjusted_laplace(u, _gauss_obj(sigma), x, grid)
    exact = gaussian_pdf(grid, GaussianLaw(x.mean(), sd))
    # quadrature oracle for a single point, independent of the matrix product
    i = 700
    num = integrate.quad(lambda t: math.exp(-0.5 * ((grid[i] - t) / tau) ** 2) * math.exp(-T * (t - x.mean()) ** 2 / 2), -10, 10, epsabs=1e-14)[0]
    den = integrate.quad(
        lambda s: integrate.quad(lambda t: math.exp(-0.5 * ((s - t) / tau) ** 2) * math.exp(-T * (t - x.mean()) ** 2 / 2), -10, 10)[0],
        grid[0], grid[-1], epsabs=1e-12,
    )[0]
    assert d.values[i] == pytest.approx(num / den, rel=1e-6)
    assert np.max(np.abs(d.values - exact)) < 1e-6


def test_criterion_adjusted_laplace_constant_criterion_uniform():
    grid = np.linspace(-1, 1, 101)
    d = criterion_adjusted_laplace(lambda a, b: np.ones(np.broadcast(a, b).shape), _gauss_obj(1.0), [0.1, 0.2], grid)
    assert np.allclose(d.values, 0.5)


@settings(max_examples=25, deadline=None)
@given(st.floats(1e-3, 1e3), st.floats(0.05, 2.0))
def test_criterion_rescaling_invariance(c, tau):
    grid = np.linspace(-3, 3, 301)
    u = build_criterion("gaussian-kernel", {"tau": tau})
    scaled = lambda a, b: c * u(a, b)
    a = criterion_adjusted_calibration(u, 0.2, grid)
    b = criterion_adjusted_calibration(scaled, 0.2, grid)
    assert np.max(np.abs(a.values - b.values)) <= 1e-9
    x = [0.1, -0.3, 0.5]
    a = criterion_adjusted_laplace(u, _gauss_obj(1.0), x, grid)
    b = criterion_adjusted_laplace(scaled, _gauss_obj(1.0), x, grid)
    assert np.max(np.abs(a.values - b.values)) <= 1e-9


def test_every_builder_is_normalized():
    grid = np.linspace(-4, 4, 401)
    x = [0.1, -0.3, 0.5, 0.2]
    u = build_criterion("gaussian-kernel", {"tau": 0.5})
    for d in (
        gaussian_density(gaussian_approx(x), grid),
        criterion_adjusted_calibration(u, 0.0, grid),
        laplace_approx(_gauss_obj(1.0), x, grid),
        criterion_adjusted_laplace(u, _gauss_obj(1.0), x, grid),
        plain_calibration(0.3),
    ):
        assert d.masses.sum() == pytest.approx(1.0, abs=1e-10)


def test_gaussian_approx_consistency_trend():
    # Wasserstein distance to the exact law N(theta0, s/sqrt(T)) shrinks with T
    theta0, s, reps = 0.0, 0.2, 200
    medians = []
    for T in (20, 50, 100):
        dist = []
        for r in range(reps):
            x = theta0 + s * gaussian_quantile(uniforms(RngStream(77, r), T))
            dist.append(wasserstein2_gaussian(gaussian_approx(x), GaussianLaw(theta0, s / math.sqrt(T))))
        medians.append(np.median(dist))
    assert medians[0] > medians[1] > medians[2]


def test_gaussian_approx_kolmogorov_does_not_vanish():
    # the Kolmogorov distance stays O(1): its law tends to 2*Phi(|Z|/2) - 1
    theta0, s, T, reps = 0.0, 0.2, 100, 400
    dist = []
    for r in range(reps):
        x = theta0 + s * gaussian_quantile(uniforms(RngStream(78, r), T))
        dist.append(kolmogorov_gaussian_exact(gaussian_approx(x), GaussianLaw(theta0, s / math.sqrt(T))))
    limit_median = 2 * gaussian_cdf(gaussian_quantile(0.75) / 2) - 1
    assert np.median(dist) == pytest.approx(limit_median, abs=0.03)
