"""Ornstein-Uhlenbeck realizations of a memory measure and their diagnostics."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.signal import lfilter, lfiltic
from scipy.stats import kendalltau

from .errors import AccuracyError, DomainError, ValidationError
from .paths import SampledPath
from .scaling import energy_distance

__all__ = [
    "ProcessSpec",
    "simulate_ou",
    "AutocorrelationReport",
    "empirical_autocorrelation",
    "batch_means_stderr",
    "ConvergenceReport",
    "convergence_distance",
    "solve_coupled_constitutive",
]

MIN_SAMPLES = 1000


@dataclass(frozen=True)
class ProcessSpec:
    """Parameters of ``dX = -theta X dt + sigma dW`` on a fixed grid."""

    theta: float
    sigma: float
    x0: float = 0.0
    dt: float = 1e-2
    steps: int = 1000
    seed: int = 0

    def __post_init__(self):
        for name in ("theta", "sigma", "x0", "dt"):
            if not math.isfinite(getattr(self, name)):
                raise ValidationError(f"{name} must be finite")
        if self.theta <= 0:
            raise ValidationError(f"theta must be > 0, got {self.theta}")
        if self.sigma < 0:
            raise ValidationError(f"sigma must be >= 0, got {self.sigma}")
        if self.dt <= 0:
            raise ValidationError(f"dt must be > 0, got {self.dt}")
        if self.dt * self.theta >= 0.1:
            raise ValidationError(f"dt*theta must be < 0.1, got {self.dt * self.theta:g}")
        if int(self.steps) != self.steps or self.steps < 1:
            raise ValidationError(f"steps must be a positive integer, got {self.steps}")
        object.__setattr__(self, "steps", int(self.steps))

    @property
    def stationary_variance(self):
        return self.sigma**2 / (2.0 * self.theta)


def simulate_ou(spec: ProcessSpec) -> SampledPath:
    """Euler-Maruyama path with ``steps + 1`` samples starting at ``t = 0``.

    The recursion ``x[k+1] = (1 - theta dt) x[k] + sigma sqrt(dt) z[k]`` runs
    through ``lfilter``, so a given seed always yields the same bits.
    """
    rng = np.random.default_rng(spec.seed)
    decay = 1.0 - spec.theta * spec.dt
    kicks = spec.sigma * math.sqrt(spec.dt) * rng.standard_normal(spec.steps)
    zi = np.array([decay * spec.x0])
    tail, _ = lfilter([1.0], [1.0, -decay], kicks, zi=zi)
    return SampledPath(0.0, spec.dt, np.concatenate([[spec.x0], tail]))


def batch_means_stderr(series, batches=30) -> float:
    """Standard error of the mean of a correlated series from non-overlapping batch means."""
    series = np.asarray(series, dtype=float)
    if batches < 2 or series.size < 2 * batches:
        raise DomainError(f"need at least {2 * batches} samples for {batches} batches")
    size = series.size // batches
    means = series[: size * batches].reshape(batches, size).mean(axis=1)
    return float(means.std(ddof=1) / math.sqrt(batches))


@dataclass(frozen=True)
class AutocorrelationReport:
    lags: np.ndarray
    correlation: np.ndarray
    stderr: np.ndarray
    variance: float
    variance_stderr: float
    mean: float
    mean_stderr: float
    theta: float
    burn_in: float

    def rows(self):
        return list(zip(self.lags.tolist(), self.correlation.tolist()))


def _estimate_theta(x, dt):
    x = x - x.mean()
    r1 = float(np.dot(x[:-1], x[1:]) / np.dot(x, x))
    if not 0 < r1 < 1:
        raise DomainError("cannot estimate a mean-reversion rate from this path; pass theta")
    return -math.log(r1) / dt


def empirical_autocorrelation(p: SampledPath, max_lag: float, theta=None, lag_stride=1, batches=30):
    """Normalized autocovariance on lags ``0, stride*dt, ...`` up to ``max_lag``.

    The first ``10/theta`` of the path is dropped as transient (``theta`` is
    estimated from the lag-one correlation when not given).  Each lag uses the
    unbiased ``1/(N - k)`` product average; its standard error comes from batch
    means of the linearized ratio ``(y_k - rho_k y_0) / c_0``.
    """
    if len(p) < MIN_SAMPLES:
        raise DomainError(f"path has {len(p)} samples, need at least {MIN_SAMPLES}")
    if not 0 <= max_lag < p.duration / 4:
        raise DomainError(f"max_lag must lie in [0, duration/4) = [0, {p.duration / 4:g})")
    if lag_stride < 1:
        raise DomainError("lag_stride must be >= 1")
    if theta is None:
        theta = _estimate_theta(p.values, p.dt)
    elif not theta > 0:
        raise DomainError("theta must be > 0")
    burn_in = 10.0 / theta
    x = p.values[int(math.ceil(burn_in / p.dt)):]
    k_max = int(math.floor(max_lag / p.dt + 1e-9))
    if x.size - k_max < max(MIN_SAMPLES, 2 * batches):
        raise DomainError("path too short after burn-in for the requested lags")
    mean = float(x.mean())
    d = x - mean
    sq = d * d
    c0 = float(sq.mean())
    if c0 == 0:
        raise DomainError("path is constant after burn-in")
    ks = np.arange(0, k_max + 1, lag_stride)
    rho = np.empty(ks.size)
    se = np.empty(ks.size)
    for i, k in enumerate(ks):
        prod = d[: d.size - k] * d[k:]
        rho[i] = prod.mean() / c0
        se[i] = 0.0 if k == 0 else batch_means_stderr((prod - rho[i] * sq[: prod.size]) / c0, batches)
    return AutocorrelationReport(
        lags=ks * p.dt,
        correlation=rho,
        stderr=se,
        variance=c0,
        variance_stderr=batch_means_stderr(sq, batches),
        mean=mean,
        mean_stderr=batch_means_stderr(x, batches),
        theta=float(theta),
        burn_in=burn_in,
    )


@dataclass(frozen=True)
class ConvergenceReport:
    """Per-window energy distances to the final window.

    ``trend`` is Kendall's tau of distance against window index over all
    windows but the last; negative means the distances shrink.  ``noise_floor``
    is the distance between the two halves of the final window.
    """

    distances: np.ndarray
    trend: float
    noise_floor: float
    window_samples: int

    def rows(self):
        return list(enumerate(self.distances.tolist()))


def convergence_distance(p: SampledPath, windows: int) -> ConvergenceReport:
    if windows < 2:
        raise DomainError("need at least 2 windows")
    size = len(p) // windows
    if size < MIN_SAMPLES:
        raise DomainError(f"windows would hold {size} samples, need at least {MIN_SAMPLES}")
    chunks = p.values[: size * windows].reshape(windows, size)
    final = chunks[-1]
    dist = np.array([energy_distance(c, final) for c in chunks])
    if windows > 2:
        trend = kendalltau(np.arange(windows - 1), dist[:-1]).statistic
        trend = 0.0 if not math.isfinite(trend) else float(trend)
    else:
        trend = 0.0
    floor = energy_distance(final[: size // 2], final[size // 2:])
    return ConvergenceReport(dist, trend, floor, size)


def _trapezoid_relax(u, tau, gain, dt, y0):
    """Crank-Nicolson solution of ``tau y' + y = gain * tau * u`` from ``y[0] = y0``."""
    h = dt / (2.0 * tau)
    a = (1.0 - h) / (1.0 + h)
    g = gain * dt / (2.0 * (1.0 + h))
    b = [g, g]
    zi = lfiltic(b, [1.0, -a], y=[y0], x=[u[0]])
    tail, _ = lfilter(b, [1.0, -a], u[1:], zi=zi)
    return np.concatenate([[y0], tail])


def solve_coupled_constitutive(params, drive: SampledPath, start="rest"):
    """Flux ``J`` and force ``X`` of the two-stage relaxation chain.

    Solves ``tau1 J' + J = lambda1 tau1 U`` and ``tau2 X' + X = lambda2 tau2 J``
    with the trapezoidal rule, starting from rest or from the fixed point of
    the initial drive value.
    """
    tau1, tau2 = float(params.tau1), float(params.tau2)
    lam1, lam2 = float(params.lambda1), float(params.lambda2)
    if not (tau1 > 0 and tau2 > 0):
        raise DomainError("relaxation times must be > 0")
    if drive.dt > min(tau1, tau2) / 10.0:
        raise AccuracyError(f"dt={drive.dt:g} exceeds min(tau1, tau2)/10 = {min(tau1, tau2) / 10:g}")
    u = drive.values
    if start == "rest":
        j0 = x0 = 0.0
    elif start == "fixed_point":
        j0 = lam1 * tau1 * float(u[0])
        x0 = lam2 * tau2 * j0
    else:
        raise DomainError(f"start must be 'rest' or 'fixed_point', got {start!r}")
    j = _trapezoid_relax(u, tau1, lam1, drive.dt, j0)
    x = _trapezoid_relax(j, tau2, lam2, drive.dt, x0)
    return drive.with_values(j), drive.with_values(x)
