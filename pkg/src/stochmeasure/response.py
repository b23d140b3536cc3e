"""Linear response with memory.

``M(t) = chi_ne * int_{-inf}^t w((t - t') / tau) H(t') dt'`` on a uniform grid.
The drive is interpolated linearly between samples and each panel is
integrated against the kernel exactly (closed form for exponential memory,
8-point Gauss-Legendre per panel otherwise), so the scheme is second order
in ``dt`` and reproduces constant drives to rounding.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import AccuracyError, DomainError, ValidationError
from .measures import MemoryKernel
from .paths import SampledPath

__all__ = [
    "ResponseModel",
    "memory_integral",
    "respond",
    "mcv_residual",
    "markovian_limit_scan",
    "ScanPoint",
]

PREHISTORIES = ("hold", "zero")

_GL_X, _GL_W = np.polynomial.legendre.leggauss(8)
_GL_S = 0.5 * (_GL_X + 1.0)  # nodes on [0, 1]
_GL_W = 0.5 * _GL_W


@dataclass(frozen=True)
class ResponseModel:
    """Scalar susceptibility ``chi0`` dressed by a memory kernel."""

    chi0: float
    kernel: MemoryKernel

    def __post_init__(self):
        if not math.isfinite(self.chi0):
            raise ValidationError(f"chi0 must be finite, got {self.chi0}")

    @property
    def chi_ne(self):
        return self.chi0 * self.kernel.amplitude


def _exp_moments(r):
    """``int_0^1 e^{-r s} ds`` and ``int_0^1 s e^{-r s} ds``."""
    m0 = -math.expm1(-r) / r
    if r < 0.5:
        # alternating series avoids cancellation in 1 - (1 + r) e^{-r}
        term, m1 = 1.0, 0.0
        for k in range(40):
            m1 += term / (k + 2)
            term *= -r / (k + 1)
    else:
        m1 = (-math.expm1(-r) - r * math.exp(-r)) / (r * r)
    return m0, m1


def _panel_weights(kernel: MemoryKernel, dt: float, count: int):
    """Weights ``a_j, c_j`` of ``H`` at the near/far end of lag panel ``j``."""
    tau = kernel.stochastic_time
    if kernel.is_exponential_family:
        m0, m1 = _exp_moments(dt / tau)
        decay = np.exp(-(dt / tau) * np.arange(count))
        return dt * (m0 - m1) * decay, dt * m1 * decay
    s = _GL_S
    u = dt * (np.arange(count)[:, None] + s[None, :])
    w = kernel.shape(u / tau) * _GL_W[None, :]
    return dt * (w @ (1.0 - s)), dt * (w @ s)


def _direct_sum(h, a, c):
    """``sum_j a_j H_{k-j} + c_j H_{k-j-1}`` over panels ``j < k``, for every ``k``."""
    v = a.copy()
    v[1:] += c[:-1]
    return np.convolve(h, v)[: h.size] - a * h[0]


def _recursive_sum(h, a0, c0, decay):
    """Same sum when ``a_j, c_j`` decay geometrically: ``I_k = a0 H_k + c0 H_{k-1} + decay I_{k-1}``."""
    from scipy.signal import lfilter  # deferred: slow to import

    x = np.empty(h.size)
    x[0] = 0.0
    x[1:] = a0 * h[1:] + c0 * h[:-1]
    return lfilter([1.0], [1.0, -decay], x)


def memory_integral(kernel: MemoryKernel, drive: SampledPath, prehistory: str = "hold"):
    """``int_0^inf w(u / tau) H(t - u) du`` at every sample of ``drive``.

    The kernel amplitude is not applied.  Before ``drive.t0`` the drive is
    either held at its first value (``hold``) or zero (``zero``).
    """
    if prehistory not in PREHISTORIES:
        raise DomainError(f"prehistory must be one of {PREHISTORIES}, got {prehistory!r}")
    h = drive.values
    n = h.size
    dt = drive.dt
    if kernel.is_delta:
        return h.copy()
    a, c = _panel_weights(kernel, dt, n)
    if kernel.is_exponential_family:
        out = _recursive_sum(h, a[0], c[0], math.exp(-dt / kernel.stochastic_time))
    else:
        out = _direct_sum(h, a, c)
    if prehistory == "hold":
        lags = dt * np.arange(n)
        tau = kernel.stochastic_time
        out = out + h[0] * tau * kernel.shape_tail(lags / tau)
    return out


def _check_resolution(kernel: MemoryKernel, dt: float, factor: float):
    if not kernel.is_delta and dt > kernel.stochastic_time / factor:
        raise AccuracyError(
            f"time step {dt:g} exceeds stochastic_time/{factor:g} = {kernel.stochastic_time / factor:g}"
        )


def respond(m: ResponseModel, drive: SampledPath, prehistory: str = "hold") -> SampledPath:
    """Response path ``M`` of ``m`` to ``drive``; Delta memory gives ``chi_ne * H``."""
    _check_resolution(m.kernel, drive.dt, 10.0)
    return drive.with_values(m.chi_ne * memory_integral(m.kernel, drive, prehistory))


def mcv_residual(m: ResponseModel, drive: SampledPath, prehistory: str = "hold") -> float:
    """Max interior residual of ``tau dM/dt + M - chi_ne tau H`` (centered differences)."""
    if not m.kernel.is_exponential_family:
        raise DomainError(
            f"the relaxation-equation form needs exponential memory, got {m.kernel.kind.value}"
        )
    tau = m.kernel.stochastic_time
    _check_resolution(m.kernel, drive.dt, 100.0)
    if len(drive) < 3:
        raise DomainError("need at least 3 samples for centered differences")
    M = respond(m, drive, prehistory).values
    H = drive.values
    dMdt = (M[2:] - M[:-2]) / (2.0 * drive.dt)
    r = tau * dMdt + M[1:-1] - m.chi_ne * tau * H[1:-1]
    return float(np.max(np.abs(r)))


@dataclass(frozen=True)
class ScanPoint:
    tau: float
    distance: float
    near_floor: bool


def markovian_limit_scan(chi0, drive: SampledPath, taus, kind="exp", prehistory="hold"):
    """Sup-distance between unit-mass memory response and ``chi0 * H`` per ``tau``.

    Each kernel has amplitude ``1 / tau`` so it integrates to one.  Points with
    ``tau < 100 dt`` are marked ``near_floor``; ``tau < 10 dt`` is rejected.
    """
    taus = [float(t) for t in taus]
    if not taus or any(t <= 0 for t in taus):
        raise DomainError("taus must be positive")
    if min(taus) < 10.0 * drive.dt:
        raise AccuracyError(
            f"smallest tau {min(taus):g} is below 10 * dt = {10 * drive.dt:g}; refine the drive"
        )
    target = chi0 * drive.values
    out = []
    for tau in taus:
        kernel = MemoryKernel(kind, 1.0 / tau, tau)
        M = respond(ResponseModel(chi0, kernel), drive, prehistory).values
        out.append(ScanPoint(tau, float(np.max(np.abs(M - target))), tau < 100.0 * drive.dt))
    return out
