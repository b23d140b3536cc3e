"""Two-time correlation functions under a stochastic memory measure.

The binary-mixture prefactor is ``Xi = A B + B**2``.  The full integral
``C(t) = Xi * int_{-inf}^t e^{-n (t + t')} W(t - t') dt'`` factorizes at long
times into ``kappa * Xi * e^{-2 n t}``.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy import integrate as sp_integrate

from .errors import CutoffWarning, DomainError, SingularityError, ValidationError
from .measures import MemoryKernel, asymptotic_amplitude, check_convergent
from .paths import SampledPath
from .response import memory_integral

__all__ = [
    "EITParameters",
    "parse_field",
    "amplitude_A",
    "amplitude_B",
    "amplitude_Xi",
    "correlate_2time",
    "pair_correlation_matrix",
    "eit_correlation",
    "van_hove_asymptote",
    "finite_history_correlation",
    "PlateauReport",
    "plateau_metric",
]

_SINGULAR = 1e-8


class FieldPreset:
    """Picklable scalar field built from a ``const:c`` or ``linear:a,b`` preset."""

    def __init__(self, text):
        kind, _, args = str(text).partition(":")
        kind = kind.strip().lower()
        try:
            coef = [float(x) for x in args.split(",")] if args.strip() else []
        except ValueError:
            raise ValidationError(f"field preset {text!r} has non-numeric coefficients") from None
        if kind == "const" and len(coef) == 1:
            coef = [coef[0], 0.0]
        elif not (kind == "linear" and len(coef) == 2):
            raise ValidationError(f"field preset must be const:c or linear:a,b, got {text!r}")
        self.text = str(text)
        self.a, self.b = coef

    def __call__(self, x):
        return self.a + self.b * np.asarray(x, dtype=float)

    def __repr__(self):
        return f"FieldPreset({self.text!r})"


def parse_field(text) -> FieldPreset:
    return FieldPreset(text)


@dataclass(frozen=True)
class EITParameters:
    """Parameter set of the coupled flux/force binary-mixture model.

    ``H_field`` and ``T_field`` are functions of position, ``Cp`` a function of
    temperature.  ``eps_T`` defaults to ``1e-6 * T_upper``.
    """

    lambda1: float
    lambda2: float
    tau1: float
    tau2: float
    n: float
    H_field: Callable = field(default_factory=lambda: FieldPreset("const:1"))
    T_field: Callable = field(default_factory=lambda: FieldPreset("const:1"))
    Cp: Callable = field(default_factory=lambda: FieldPreset("linear:0,1"))
    T_upper: float = 1.0
    eps_T: float | None = None

    def __post_init__(self):
        for name in ("lambda1", "lambda2", "tau1", "tau2", "n", "T_upper"):
            v = getattr(self, name)
            if not math.isfinite(v):
                raise ValidationError(f"{name} must be finite, got {v}")
        for name in ("tau1", "tau2", "n", "T_upper"):
            if getattr(self, name) <= 0:
                raise ValidationError(f"{name} must be > 0, got {getattr(self, name)}")
        eps = 1e-6 * self.T_upper if self.eps_T is None else float(self.eps_T)
        if not (0 < eps < self.T_upper):
            raise ValidationError(f"eps_T must lie in (0, T_upper), got {eps}")
        object.__setattr__(self, "eps_T", eps)


def amplitude_A(p: EITParameters, r=0.0, cutoff_tol=1e-4) -> float:
    """``int_{eps_T}^{T_upper} Cp(T)/T dT / H(r)``.

    Emits :class:`CutoffWarning` when ``|Cp(eps_T)|`` exceeds ``cutoff_tol``
    times the integral, the sign that the integrand is not integrable at 0.
    """
    h = float(p.H_field(r))
    if not h > 0:
        raise DomainError(f"H_field(r) must be > 0, got {h} at r={r}")
    integral, _ = sp_integrate.quad(lambda T: float(p.Cp(T)) / T, p.eps_T, p.T_upper,
                                    epsabs=1e-13, epsrel=1e-12, limit=200)
    # the dropped piece int_0^eps Cp/T dT is about |Cp(eps)| for Cp ~ T
    if abs(float(p.Cp(p.eps_T))) > cutoff_tol * max(abs(integral), 1e-300):
        warnings.warn(
            f"Cp(eps_T)={float(p.Cp(p.eps_T)):g} is not small; Cp/T may be non-integrable at T=0",
            CutoffWarning, stacklevel=2,
        )
    return integral / h


def _b_factors(p: EITParameters):
    a = 1.0 - p.n * p.tau1
    b = 1.0 - p.n * p.tau2
    for name, v in (("n", p.n), ("1 - n*tau1", a), ("1 - n*tau2", b)):
        if abs(v) < _SINGULAR:
            raise SingularityError(f"amplitude B is singular: {name} = {v:g}")
    return a, b


def amplitude_B(p: EITParameters, r=0.0) -> float:
    a, b = _b_factors(p)
    lam1, tau1, tau2 = p.lambda1, p.tau1, p.tau2
    pref = lam1 * p.lambda2 * tau1 * float(p.H_field(r)) * float(p.T_field(r)) / (p.n * a * a)
    bracket = lam1 * tau1**2 - tau2 * (lam1 * tau1 / a + (lam1 * a - 1.0) / b)
    return pref * bracket


def _amplitude_B_common_denominator(p: EITParameters, r=0.0) -> float:
    """Same quantity over the single denominator ``n a^3 b``."""
    a, b = _b_factors(p)
    lam1, tau1, tau2 = p.lambda1, p.tau1, p.tau2
    hT = float(p.H_field(r)) * float(p.T_field(r))
    num = lam1 * tau1**2 * a * b - lam1 * tau1 * tau2 * b - tau2 * a * (lam1 * a - 1.0)
    return lam1 * p.lambda2 * tau1 * hT * num / (p.n * a**3 * b)


def amplitude_Xi(p: EITParameters, r=0.0, **kw) -> float:
    A = amplitude_A(p, r, **kw)
    B = amplitude_B(p, r)
    return A * B + B * B


def correlate_2time(Z: SampledPath, kernel: MemoryKernel, t: float, prehistory="hold") -> float:
    """``Z(t) * int_{-inf}^t W(t - t') Z(t') dt'`` over the sampled history.

    Off-grid ``t`` is handled by linear interpolation of both factors.
    """
    times = Z.times
    if not (times[0] - 1e-12 * abs(Z.dt) <= t <= times[-1] + 1e-12 * abs(Z.dt)):
        raise DomainError(f"t={t} outside the path range [{times[0]}, {times[-1]}]")
    if not kernel.is_delta and Z.dt > kernel.stochastic_time / 10.0:
        raise DomainError(f"path step {Z.dt:g} too coarse for stochastic_time {kernel.stochastic_time:g}")
    weighted = kernel.amplitude * memory_integral(kernel, Z, prehistory)
    return float(np.interp(t, times, Z.values) * np.interp(t, times, weighted))


def pair_correlation_matrix(Z: SampledPath, kernel: MemoryKernel):
    """Two-time density ``Z(t_i) W(|t_i - t_j|) Z(t_j)`` on the full grid."""
    t = Z.times
    lag = np.abs(t[:, None] - t[None, :])
    w = np.where(lag == 0, kernel.amplitude, 0.0) if kernel.is_delta else kernel(lag)
    return Z.values[:, None] * w * Z.values[None, :]


def eit_correlation(p, r, kernel: MemoryKernel, t: float) -> float:
    """Correlation integral over ``t' in (-inf, t]``, by direct quadrature in ``t'``.

    ``p`` is an :class:`EITParameters` or a plain ``(Xi, n)`` pair.
    """
    xi, n = _xi_and_rate(p, r)
    check_convergent(kernel, n)
    if kernel.is_delta:
        return xi * kernel.amplitude * math.exp(-2.0 * n * t)
    if xi == 0:
        return 0.0

    log_amp = math.log(kernel.amplitude)

    def integrand(tp):
        # log space: e^{-n t'} overflows long before W(t - t') underflows
        return math.exp(-n * (t + tp) + log_amp + float(kernel.log_shape((t - tp) / kernel.stochastic_time)))

    # finite near-field piece plus the infinite remainder keeps QUADPACK on the bulk
    split = t - 8.0 * kernel.stochastic_time
    near, _ = sp_integrate.quad(integrand, split, t, epsabs=0.0, epsrel=1e-13, limit=200)
    far, _ = sp_integrate.quad(integrand, -np.inf, split, epsabs=0.0, epsrel=1e-13, limit=200)
    return xi * (near + far)


def _xi_and_rate(p, r):
    if isinstance(p, EITParameters):
        return amplitude_Xi(p, r), p.n
    xi, n = p
    return float(xi), float(n)


def van_hove_asymptote(p, r, kernel: MemoryKernel, t: float) -> float:
    """``kappa(kernel, n) * Xi(r) * e^{-2 n t}``; ``p`` as in :func:`eit_correlation`."""
    xi, n = _xi_and_rate(p, r)
    return asymptotic_amplitude(kernel, n) * xi * math.exp(-2.0 * n * t)


def finite_history_correlation(p, r, kernel: MemoryKernel, t: float) -> float:
    """Correlation integral with the history starting at ``t' = 0`` instead of ``-inf``.

    For a Gaussian measure this is an exponential times an error-function mode.
    """
    xi, n = _xi_and_rate(p, r)
    if t < 0:
        raise DomainError("finite-history correlation needs t >= 0")
    if kernel.is_delta:
        return xi * kernel.amplitude * math.exp(-2.0 * n * t)
    val, _ = sp_integrate.quad(lambda u: math.exp(n * u) * float(kernel(u)), 0.0, t,
                               epsabs=0.0, epsrel=1e-13, limit=200)
    return xi * math.exp(-2.0 * n * t) * val


@dataclass(frozen=True)
class PlateauReport:
    kind: str
    slope: float
    curvature: float

    @property
    def metric(self):
        """``|C''(0+)| / |C'(0+)|``; large values mean a flat short-time start."""
        return abs(self.curvature) / abs(self.slope) if self.slope != 0 else math.inf


def plateau_metric(p, kernel: MemoryKernel, lag_grid) -> PlateauReport:
    """Short-lag shape of the normalized two-time correlation.

    With the history starting at ``t' = 0`` the two-time density at lag ``s``
    is ``e^{-n s} W(s)``; normalized by its ``s = 0`` value, its one-sided
    slope and curvature at ``0+`` are estimated with second-order forward
    differences on the (uniform) lag grid.
    """
    if kernel.is_delta:
        raise DomainError("delta measure has no finite-lag structure")
    n = p.n if isinstance(p, EITParameters) else float(p)
    lags = np.asarray(lag_grid, dtype=float)
    if lags.ndim != 1 or lags.size < 4 or lags[0] != 0:
        raise DomainError("lag grid must start at 0 and hold at least 4 points")
    h = lags[1] - lags[0]
    if h <= 0 or not np.allclose(np.diff(lags), h, rtol=1e-9, atol=0):
        raise DomainError("lag grid must be uniform and increasing")
    g = np.exp(-n * lags) * kernel(lags) / kernel.amplitude
    slope = (-3.0 * g[0] + 4.0 * g[1] - g[2]) / (2.0 * h)
    curv = (2.0 * g[0] - 5.0 * g[1] + 4.0 * g[2] - g[3]) / (h * h)
    return PlateauReport(kernel.kind.value, float(slope), float(curv))
