import math
from types import SimpleNamespace

import numpy as np
import pytest

from stochmeasure.correlations import EITParameters
from stochmeasure.errors import AccuracyError, DomainError, ValidationError
from stochmeasure.measures import MemoryKernel
from stochmeasure.paths import SampledPath
from stochmeasure.response import ResponseModel, respond
from stochmeasure.stochastic import (
    ProcessSpec,
    batch_means_stderr,
    convergence_distance,
    empirical_autocorrelation,
    simulate_ou,
    solve_coupled_constitutive,
)


def test_deterministic_decay():
    p = simulate_ou(ProcessSpec(1.0, 0.0, 1.0, 1e-3, 1000))
    assert p.values[-1] == pytest.approx((1 - 1e-3) ** 1000, rel=1e-12)
    assert abs(p.values[-1] - math.exp(-1)) < 1e-3


def test_zero_dynamics():
    assert not np.any(simulate_ou(ProcessSpec(2.0, 0.0, 0.0, 1e-2, 50)).values)


def test_seeded_paths_identical():
    spec = ProcessSpec(1.0, 1.0, 0.3, 1e-2, 5000, seed=9)
    assert simulate_ou(spec).values.tobytes() == simulate_ou(spec).values.tobytes()
    assert not np.array_equal(simulate_ou(spec).values, simulate_ou(ProcessSpec(1.0, 1.0, 0.3, 1e-2, 5000, 10)).values)


@pytest.mark.parametrize("kw", [dict(theta=0.0), dict(sigma=-1.0), dict(dt=0.2), dict(steps=0), dict(dt=-1.0)])
def test_spec_validation(kw):
    args = dict(theta=1.0, sigma=1.0, x0=0.0, dt=0.01, steps=10)
    args.update(kw)
    with pytest.raises(ValidationError):
        ProcessSpec(**args)


def test_stationary_moments_and_kernel_link():
    spec = ProcessSpec(1.0, math.sqrt(2.0), 0.0, 1e-2, 400_000, seed=1)
    r = empirical_autocorrelation(simulate_ou(spec), 3.0, theta=1.0, lag_stride=25)
    assert r.correlation[0] == 1.0
    assert abs(r.variance - spec.stationary_variance) < 3 * r.variance_stderr
    assert abs(r.mean) < 3 * r.mean_stderr
    kernel = MemoryKernel.ou(1.0, 1.0)
    target = kernel(r.lags) / kernel.amplitude
    assert np.all(np.abs(r.correlation[1:] - target[1:]) < 3 * r.stderr[1:])


def test_white_noise_uncorrelated():
    x = np.random.default_rng(5).standard_normal(100_000)
    r = empirical_autocorrelation(SampledPath(0.0, 0.01, x), 0.05, theta=1e6)
    assert np.all(np.abs(r.correlation[1:]) < 3 * r.stderr[1:])


def test_theta_estimated_when_missing():
    p = simulate_ou(ProcessSpec(0.5, 1.0, 0.0, 1e-2, 200_000, seed=2))
    r = empirical_autocorrelation(p, 1.0)
    assert r.theta == pytest.approx(0.5, rel=0.2)


def test_autocorrelation_preconditions():
    short = SampledPath(0.0, 0.01, np.zeros(500))
    with pytest.raises(DomainError):
        empirical_autocorrelation(short, 0.1, theta=1.0)
    p = simulate_ou(ProcessSpec(1.0, 1.0, 0.0, 1e-2, 5000))
    with pytest.raises(DomainError):
        empirical_autocorrelation(p, 20.0, theta=1.0)


def test_batch_means_of_iid():
    x = np.random.default_rng(0).standard_normal(90_000)
    assert batch_means_stderr(x) == pytest.approx(1 / math.sqrt(x.size), rel=0.35)
    with pytest.raises(DomainError):
        batch_means_stderr(x[:10])


def test_window_compared_to_itself():
    x = np.random.default_rng(1).standard_normal(2000)
    rep = convergence_distance(SampledPath(0.0, 1.0, np.concatenate([x, x])), 2)
    assert rep.distances.tolist() == [0.0, 0.0]


def test_transient_profile_decays_to_floor():
    profiles, trends = [], []
    for seed in range(20):
        p = simulate_ou(ProcessSpec(1.0, math.sqrt(2.0), 10.0, 1e-3, 50_000, seed))
        rep = convergence_distance(p, 50)
        profiles.append(rep.distances)
        trends.append(rep.trend)
    mean = np.mean(profiles, axis=0)
    floor = np.median(mean[10:-1])
    assert mean[0] > mean[1] > mean[2] > floor
    assert mean[0] > 5 * floor
    assert np.mean(trends) < 0


def test_iid_windows_at_floor():
    x = np.random.default_rng(3).standard_normal(40_000)
    rep = convergence_distance(SampledPath(0.0, 1.0, x), 20)
    assert abs(rep.trend) < 0.4
    assert rep.distances[:-1].max() < 10 * rep.noise_floor


def test_window_preconditions():
    with pytest.raises(DomainError):
        convergence_distance(SampledPath(0.0, 1.0, np.zeros(5000)), 1)
    with pytest.raises(DomainError):
        convergence_distance(SampledPath(0.0, 1.0, np.zeros(5000)), 10)


PARAMS = SimpleNamespace(lambda1=2.0, lambda2=0.5, tau1=1.0, tau2=0.7)


def test_fixed_point_start_stays_put():
    drive = SampledPath(0.0, 0.01, np.full(300, 1.5))
    J, X = solve_coupled_constitutive(PARAMS, drive, "fixed_point")
    assert np.allclose(J.values, 2.0 * 1.0 * 1.5, rtol=1e-14)
    assert np.allclose(X.values, 0.5 * 0.7 * 3.0, rtol=1e-14)


def test_rest_without_drive():
    J, X = solve_coupled_constitutive(PARAMS, SampledPath(0.0, 0.01, np.zeros(100)))
    assert not np.any(J.values) and not np.any(X.values)


def test_step_drive_closed_form():
    drive = SampledPath(0.0, 0.01, np.ones(501))
    J, _ = solve_coupled_constitutive(PARAMS, drive)
    exact = 2.0 * 1.0 * (1 - np.exp(-J.times))
    assert np.max(np.abs(J.values - exact)) < 1e-4


def test_solver_agrees_with_memory_quadrature():
    p = EITParameters(1.3, 0.8, 0.6, 0.9, 0.5)
    errs = []
    for dt in (0.02, 0.01, 0.005):
        drive = SampledPath.from_function(lambda t: np.sin(2 * t) * t, 0.0, dt, int(round(5 / dt)) + 1)
        J, X = solve_coupled_constitutive(p, drive)
        J_q = respond(ResponseModel(p.lambda1, MemoryKernel.exponential(1.0, p.tau1)), drive, "zero")
        X_q = respond(ResponseModel(p.lambda2, MemoryKernel.exponential(1.0, p.tau2)), J_q, "zero")
        errs.append(max(np.max(np.abs(J.values - J_q.values)), np.max(np.abs(X.values - X_q.values))))
    assert errs[0] < 1e-3
    assert errs[0] > errs[1] > errs[2]


def test_solver_step_limit():
    with pytest.raises(AccuracyError):
        solve_coupled_constitutive(PARAMS, SampledPath(0.0, 0.1, np.ones(10)))
    with pytest.raises(DomainError):
        solve_coupled_constitutive(PARAMS, SampledPath(0.0, 0.01, np.ones(10)), "midway")
