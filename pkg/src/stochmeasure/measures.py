"""Memory kernels W(u) and their asymptotic amplitudes.

Every kernel is written as ``amplitude * w(u / stochastic_time)`` where ``w``
is a normalized decaying shape with ``w(0) = 1``.  The Delta kernel carries no
shape and only acts under integrals, where its atom sits on the boundary
``u = 0`` and is counted fully.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from . import quadrature
from .errors import DivergenceError, DomainError, ValidationError

__all__ = [
    "KernelKind",
    "MemoryKernel",
    "eval_kernel",
    "asymptotic_amplitude",
    "stochastic_time",
    "parse_kernel",
    "format_kernel",
]


class KernelKind(str, Enum):
    DELTA = "delta"
    EXPONENTIAL = "exp"
    ORNSTEIN_UHLENBECK = "ou"
    GAUSSIAN = "gauss"
    LORENTZIAN = "lorentz"


_ALIASES = {
    "delta": KernelKind.DELTA,
    "exp": KernelKind.EXPONENTIAL,
    "exponential": KernelKind.EXPONENTIAL,
    "ou": KernelKind.ORNSTEIN_UHLENBECK,
    "ornstein-uhlenbeck": KernelKind.ORNSTEIN_UHLENBECK,
    "gauss": KernelKind.GAUSSIAN,
    "gaussian": KernelKind.GAUSSIAN,
    "lorentz": KernelKind.LORENTZIAN,
    "lorentzian": KernelKind.LORENTZIAN,
}

# integral of the normalized shape over [0, inf), in units of stochastic_time
_SHAPE_MASS = {
    KernelKind.EXPONENTIAL: 1.0,
    KernelKind.ORNSTEIN_UHLENBECK: 1.0,
    KernelKind.GAUSSIAN: 0.5 * math.sqrt(math.pi),
    KernelKind.LORENTZIAN: 0.5 * math.pi,
}


@dataclass(frozen=True)
class MemoryKernel:
    """Weighting function ``W(u) = amplitude * w(u / stochastic_time)``.

    Use the ``delta``/``exponential``/``ou``/``gaussian``/``lorentzian``
    constructors rather than spelling out the kind.
    """

    kind: KernelKind
    amplitude: float = 1.0
    stochastic_time: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "kind", KernelKind(self.kind))
        amp, tau = float(self.amplitude), float(self.stochastic_time)
        if not (math.isfinite(amp) and math.isfinite(tau)):
            raise ValidationError(f"kernel parameters must be finite, got amplitude={amp}, tau={tau}")
        if amp <= 0:
            raise ValidationError(f"kernel amplitude must be > 0, got {amp}")
        if self.kind is KernelKind.DELTA:
            if tau != 0:
                raise ValidationError("delta kernel has stochastic_time 0")
        elif tau <= 0:
            raise ValidationError(f"stochastic_time must be > 0 for {self.kind.value}, got {tau}")
        object.__setattr__(self, "amplitude", amp)
        object.__setattr__(self, "stochastic_time", tau)

    @classmethod
    def delta(cls, amplitude=1.0):
        return cls(KernelKind.DELTA, amplitude, 0.0)

    @classmethod
    def exponential(cls, amplitude=1.0, tau=1.0):
        return cls(KernelKind.EXPONENTIAL, amplitude, tau)

    @classmethod
    def ou(cls, amplitude=1.0, tau=1.0):
        return cls(KernelKind.ORNSTEIN_UHLENBECK, amplitude, tau)

    @classmethod
    def gaussian(cls, amplitude=1.0, tau=1.0):
        return cls(KernelKind.GAUSSIAN, amplitude, tau)

    @classmethod
    def lorentzian(cls, amplitude=1.0, tau=1.0):
        return cls(KernelKind.LORENTZIAN, amplitude, tau)

    @property
    def is_delta(self):
        return self.kind is KernelKind.DELTA

    @property
    def is_exponential_family(self):
        return self.kind in (KernelKind.EXPONENTIAL, KernelKind.ORNSTEIN_UHLENBECK)

    def with_amplitude(self, amplitude):
        return MemoryKernel(self.kind, amplitude, self.stochastic_time)

    def shape(self, x):
        """Normalized shape ``w(x)`` at dimensionless lag ``x >= 0``."""
        x = np.asarray(x, dtype=float)
        if self.is_exponential_family:
            return np.exp(-x)
        if self.kind is KernelKind.GAUSSIAN:
            return np.exp(-x * x)
        if self.kind is KernelKind.LORENTZIAN:
            return 1.0 / (1.0 + x * x)
        return np.zeros_like(x)

    def log_shape(self, x):
        """``log w(x)``; finite wherever the shape is positive."""
        x = np.asarray(x, dtype=float)
        if self.is_exponential_family:
            return -x
        if self.kind is KernelKind.GAUSSIAN:
            return -x * x
        if self.kind is KernelKind.LORENTZIAN:
            return -np.log1p(x * x)
        return np.full_like(x, -np.inf)

    def shape_tail(self, x):
        """``int_x^inf w(s) ds`` for dimensionless ``x >= 0``."""
        x = np.asarray(x, dtype=float)
        if self.is_exponential_family:
            return np.exp(-x)
        if self.kind is KernelKind.GAUSSIAN:
            from scipy.special import erfc

            return 0.5 * math.sqrt(math.pi) * erfc(x)
        if self.kind is KernelKind.LORENTZIAN:
            return 0.5 * math.pi - np.arctan(x)
        return np.zeros_like(x)

    def mass(self):
        """``int_0^inf W(u) du`` (the Delta atom counts fully)."""
        if self.is_delta:
            return self.amplitude
        return self.amplitude * self.stochastic_time * _SHAPE_MASS[self.kind]

    def __call__(self, u):
        return eval_kernel(self, u)

    def __str__(self):
        return format_kernel(self)


def eval_kernel(k: MemoryKernel, u):
    """Kernel weight at lag ``u >= 0`` (scalar or array).

    The Delta kernel evaluates to 0 everywhere; its action is defined only
    under integrals.
    """
    u_arr = np.asarray(u, dtype=float)
    if not np.all(np.isfinite(u_arr)):
        raise DomainError("kernel lag must be finite")
    if np.any(u_arr < 0):
        raise DomainError(f"kernel lag must be >= 0, got min {u_arr.min()}")
    if k.is_delta:
        out = np.zeros_like(u_arr)
    else:
        out = k.amplitude * k.shape(u_arr / k.stochastic_time)
    return float(out) if out.ndim == 0 else out


def stochastic_time(k: MemoryKernel) -> float:
    return k.stochastic_time


def check_convergent(k: MemoryKernel, n: float):
    """Raise if ``int_0^inf e^{n u} W(u) du`` diverges."""
    if not math.isfinite(n) or n <= 0:
        raise DomainError(f"decay rate n must be finite and > 0, got {n}")
    if k.is_exponential_family and n * k.stochastic_time >= 1:
        raise DivergenceError(
            f"{k.kind.value} kernel requires n * tau < 1 for a finite amplitude, "
            f"got n * tau = {n * k.stochastic_time:g}"
        )
    if k.kind is KernelKind.LORENTZIAN:
        raise DivergenceError(
            "lorentzian kernel decays algebraically; int e^{n u} W(u) du diverges for every n > 0"
        )


def _tail_bound(k: MemoryKernel, n: float, upper: float) -> float:
    """Analytic upper bound on ``int_upper^inf e^{n u} W(u) du``."""
    tau = k.stochastic_time
    if k.is_exponential_family:
        rate = 1.0 / tau - n
        return k.amplitude * math.exp(-rate * upper) / rate
    # gaussian: the exponent n u - (u/tau)^2 is concave, bound by its tangent at upper
    slope = 2.0 * upper / tau**2 - n
    if slope <= 0:
        return math.inf
    return k.amplitude * math.exp(n * upper - (upper / tau) ** 2) / slope


def asymptotic_amplitude(k: MemoryKernel, n: float, rtol: float = 1e-12) -> float:
    """``kappa = int_0^inf e^{n u} W(u) du`` for decay rate ``n > 0``.

    The upper limit is doubled until the analytic tail bound falls below
    ``rtol`` of the integral accumulated so far; each finite piece is done by
    adaptive Gauss-Kronrod.
    """
    check_convergent(k, n)
    if k.is_delta:
        return k.amplitude

    def integrand(u):
        # log space keeps e^{n u} from overflowing where the shape underflows
        return k.amplitude * np.exp(n * u + k.log_shape(u / k.stochastic_time))

    upper = 4.0 * k.stochastic_time
    if k.kind is KernelKind.GAUSSIAN:
        upper = max(upper, n * k.stochastic_time**2)
    total, _ = quadrature.integrate(integrand, 0.0, upper, rtol=1e-14, atol=0.0)
    for _ in range(200):
        if _tail_bound(k, n, upper) <= rtol * abs(total):
            return total
        piece, _ = quadrature.integrate(integrand, upper, 2.0 * upper, rtol=1e-14, atol=1e-300)
        total += piece
        upper *= 2.0
    raise DivergenceError(f"tail of the {k.kind.value} amplitude integral did not shrink (n={n})")


def parse_kernel(text: str) -> MemoryKernel:
    """Parse ``kind[:amplitude[:tau]]``, e.g. ``ou:1.0:1.0``, ``delta``, ``exp:2:0.5``."""
    parts = [p.strip() for p in str(text).split(":")]
    name = parts[0].lower()
    if name not in _ALIASES:
        raise ValidationError(f"unknown kernel kind {parts[0]!r}; expected one of {sorted(set(_ALIASES))}")
    kind = _ALIASES[name]
    try:
        nums = [float(p) for p in parts[1:]]
    except ValueError:
        raise ValidationError(f"kernel string {text!r} has non-numeric fields") from None
    if kind is KernelKind.DELTA:
        if len(nums) > 2 or (len(nums) == 2 and nums[1] != 0):
            raise ValidationError(f"delta kernel takes at most an amplitude, got {text!r}")
        return MemoryKernel.delta(*nums[:1])
    if len(nums) > 2:
        raise ValidationError(f"kernel string {text!r} has too many fields")
    return MemoryKernel(kind, *nums)


def format_kernel(k: MemoryKernel) -> str:
    if k.is_delta:
        return f"delta:{k.amplitude!r}"
    return f"{k.kind.value}:{k.amplitude!r}:{k.stochastic_time!r}"
