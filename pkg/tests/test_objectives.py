import math

import numpy as np
import pytest

from neoclassical.approximations import gaussian_density, laplace_approx
from neoclassical.distributions import GaussianLaw, RngStream, gaussian_quantile, grid_density, uniforms
from neoclassical.errors import AlignmentError, ConfigError, DegenerateInputError
from neoclassical.inference import hpd_region, mode_estimate
from neoclassical.objectives import (
    ObjectiveSpec,
    build_criterion,
    build_objective,
    build_weight,
    weight_change_of_measure,
)


def gaussian_sample(seed, T, theta0=0.0, s=1.0):
    return theta0 + s * gaussian_quantile(uniforms(RngStream(seed, 0), T))


def test_gaussian_loglik_matches_known_sigma_gaussian():
    sigma = 0.7
    x = gaussian_sample(11, 40, 0.5, sigma)
    T, xbar = x.size, x.mean()
    sd = sigma / math.sqrt(T)
    grid = np.linspace(xbar - 8 * sd, xbar + 8 * sd, 3001)
    lap = laplace_approx(build_objective({"name": "gaussian-loglik", "params": {"sigma": sigma}}), x, grid)
    ref = gaussian_density(GaussianLaw(xbar, sd), grid)
    assert np.max(np.abs(lap.values - ref.values)) <= 1e-6
    a, b = hpd_region(lap, 0.05).intervals[0], hpd_region(ref, 0.05).intervals[0]
    assert abs(a[0] - b[0]) <= lap.spacing and abs(a[1] - b[1]) <= lap.spacing


def test_gaussian_loglik_value():
    q = build_objective(ObjectiveSpec("gaussian-loglik", {"sigma": 1.0})).evaluator
    x = np.array([1.0, 2.0, 4.0])
    direct = np.mean(-0.5 * np.log(2 * np.pi) - 0.5 * (x - 1.5) ** 2)
    assert q(x, np.array([1.5]))[0] == pytest.approx(direct)


def test_bernoulli_loglik_mode():
    x = np.array([1, 0, 0, 1, 1, 0, 1, 1, 0, 1], dtype=float)
    grid = np.linspace(0, 1, 1001)
    d = laplace_approx(build_objective({"name": "bernoulli-loglik"}), x, grid)
    assert abs(mode_estimate(d) - x.mean()) <= d.spacing
    assert np.all(np.isfinite(d.values))


def test_least_squares_mode_at_moment():
    x = gaussian_sample(12, 60, 2.0, 0.5)
    grid = np.linspace(1, 3, 2001)
    d = laplace_approx(build_objective({"name": "least-squares", "params": {"powers": [1]}}), x, grid)
    assert abs(mode_estimate(d) - x.mean()) <= d.spacing


def test_flat_weight_is_plain_laplace():
    assert build_weight("flat") is None
    x = gaussian_sample(13, 30)
    grid = np.linspace(-1, 1, 801)
    a = laplace_approx(build_objective({"name": "gaussian-loglik"}), x, grid)
    b = laplace_approx(build_objective({"name": "gaussian-loglik", "weight_name": "gaussian-kernel", "weight_params": {"scale": 1e6}}), x, grid)
    assert np.max(np.abs(a.values - b.values)) < 1e-6


def test_registry_errors():
    with pytest.raises(ConfigError):
        build_objective({"name": "nope"})
    with pytest.raises(ConfigError):
        build_objective({"name": "gaussian-loglik", "params": {"sigma": -1}})
    with pytest.raises(ConfigError):
        build_objective({"params": {}})
    with pytest.raises(ConfigError):
        build_weight("indicator-interval", {"lo": 1, "hi": 0})
    with pytest.raises(ConfigError):
        build_criterion("nope")
    with pytest.raises(ConfigError):
        build_objective({"name": "least-squares", "params": {"powers": [1, 2], "scales": [1]}})


def test_change_of_measure():
    x = gaussian_sample(14, 25)
    grid = np.linspace(-1.5, 1.5, 601)
    plain = laplace_approx(build_objective({"name": "gaussian-loglik"}), x, grid)
    assert np.allclose(weight_change_of_measure(plain, plain), 1.0)
    spec = {"name": "gaussian-loglik", "weight_name": "indicator-interval", "weight_params": {"lo": -0.2, "hi": 0.4}}
    weighted = laplace_approx(build_objective(spec), x, grid)
    ratio = weight_change_of_measure(plain, weighted)
    ind = (grid >= -0.2) & (grid <= 0.4)
    c = ratio[ind][0]
    assert np.allclose(ratio, c * ind)


def test_change_of_measure_errors():
    grid = np.linspace(0, 1, 101)
    left = grid_density(grid, (grid < 0.4).astype(float))
    right = grid_density(grid, (grid > 0.6).astype(float))
    with pytest.raises(DegenerateInputError):
        weight_change_of_measure(left, right)
    other = grid_density(np.linspace(0, 2, 101), np.ones(101))
    with pytest.raises(AlignmentError):
        weight_change_of_measure(left, other)


def test_laplace_mode_consistency():
    theta0, reps = 0.3, 200
    medians = []
    obj = build_objective({"name": "gaussian-loglik"})
    grid = np.linspace(-1.5, 2.1, 3601)
    for T in (20, 50, 100):
        err = [abs(mode_estimate(laplace_approx(obj, theta0 + gaussian_quantile(uniforms(RngStream(90, r), T)), grid)) - theta0) for r in range(reps)]
        medians.append(np.median(err))
    assert medians[0] > medians[1] > medians[2]


def test_criterion_rejects_unknown_parameters():
    with pytest.raises(ConfigError):
        build_criterion("gaussian-kernel", {"scale": 0.05})
    assert build_criterion("gaussian-kernel", {"tau": 0.05})(0.0, 0.0) == 1.0
