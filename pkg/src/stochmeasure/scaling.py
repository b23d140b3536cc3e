"""Uniparametric state-space scaling and the coarse-graining sequence it generates.

``chi_xi(x) = x* + xi (x - x*)`` contracts a point configuration toward the
equilibrium point ``x*``; an ``n``-point product observable picks up the
factor ``Sigma(xi)^n`` with ``Sigma(xi) = xi^{-Delta}``.  Convergence of the
induced point distributions toward the point mass at ``x*`` is tracked with
the energy distance ``2 E|X - Y| - E|X - X'| - E|Y - Y'|``, which is
homogeneous of degree one under the contraction.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np
from scipy.spatial.distance import cdist, pdist

from .errors import DomainError, ValidationError
from .paths import read_columns, write_columns

__all__ = [
    "Configuration",
    "ScalingSpec",
    "scale_points",
    "scale_observable",
    "energy_distance",
    "CoarseGrainStep",
    "coarse_grain_sequence",
    "uniform_xi_sampler",
]


@dataclass(frozen=True, eq=False)
class Configuration:
    """Finite point set in 1 or 2 dimensions, stored as an ``(m, nu)`` array."""

    points: np.ndarray

    def __post_init__(self):
        pts = np.array(self.points, dtype=float)
        if pts.ndim == 1:
            pts = pts[:, None]
        if pts.ndim != 2 or pts.shape[0] < 1 or pts.shape[1] not in (1, 2):
            raise ValidationError(f"configuration must be m x 1 or m x 2 with m >= 1, got {pts.shape}")
        if not np.all(np.isfinite(pts)):
            raise ValidationError("coordinates must be finite")
        pts.setflags(write=False)
        object.__setattr__(self, "points", pts)

    @property
    def nu(self):
        return self.points.shape[1]

    def __len__(self):
        return self.points.shape[0]

    @classmethod
    def from_csv(cls, path):
        header, cols = read_columns(path)
        return cls(np.column_stack(cols))

    def to_csv(self, path):
        names = ("x", "y")[: self.nu]
        write_columns(path, names, [self.points[:, j] for j in range(self.nu)])


@dataclass(frozen=True, eq=False)
class ScalingSpec:
    xi: float
    x_star: np.ndarray
    sigma_exponent: float = 0.0
    field: Optional[Callable] = None

    def __post_init__(self):
        if not (0.0 <= self.xi <= 1.0):
            raise ValidationError(f"xi must lie in [0, 1], got {self.xi}")
        xs = np.atleast_1d(np.asarray(self.x_star, dtype=float))
        if xs.ndim != 1 or not np.all(np.isfinite(xs)):
            raise ValidationError("x_star must be a finite coordinate")
        if not math.isfinite(self.sigma_exponent):
            raise ValidationError("sigma_exponent must be finite")
        object.__setattr__(self, "x_star", xs)

    def with_xi(self, xi):
        return ScalingSpec(xi, self.x_star, self.sigma_exponent, self.field)


def _check_dims(c: Configuration, s: ScalingSpec):
    if s.x_star.size != c.nu:
        raise DomainError(f"x_star has dimension {s.x_star.size}, configuration has {c.nu}")


def scale_points(c: Configuration, s: ScalingSpec) -> Configuration:
    _check_dims(c, s)
    # convex-combination form is exact at both xi = 0 and xi = 1
    return Configuration((1.0 - s.xi) * s.x_star + s.xi * c.points)


def scale_observable(c: Configuration, s: ScalingSpec) -> float:
    """``xi^{-Delta n} prod_i phi(chi_xi(x_i))`` with ``phi = 1`` when no field is set."""
    if s.xi == 0 and s.sigma_exponent > 0:
        raise DomainError("xi = 0 with a positive scaling exponent is singular")
    scaled = scale_points(c, s).points
    n = len(c)
    if s.field is None:
        prod = 1.0
    else:
        arg = scaled[:, 0] if c.nu == 1 else scaled
        vals = np.array([s.field(p) for p in arg], dtype=float)
        prod = float(np.prod(vals))
    if s.sigma_exponent == 0:
        return prod
    return prod * s.xi ** (-s.sigma_exponent * n)


def _mean_abs_diff_1d(x, y):
    """``mean |x_i - y_j|`` in ``O((m + n) log n)`` via sorted prefix sums."""
    y = np.sort(y)
    csum = np.concatenate([[0.0], np.cumsum(y)])
    k = np.searchsorted(y, x, side="right")
    total = x * (2 * k - y.size) - 2.0 * csum[k] + csum[-1]
    return float(np.sum(total)) / (x.size * y.size)


def energy_distance(a, b) -> float:
    """V-statistic ``2 E|X - Y| - E|X - X'| - E|Y - Y'|`` between two samples.

    Accepts 1-D samples or ``(m, nu)`` point arrays; the 1-D case uses sorting
    so long windows stay cheap.
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.ndim == 2 and a.shape[1] == 1:
        a = a[:, 0]
    if b.ndim == 2 and b.shape[1] == 1:
        b = b[:, 0]
    if a.size == 0 or b.size == 0:
        raise DomainError("energy distance needs non-empty samples")
    if a.ndim == 1 and b.ndim == 1:
        exy = _mean_abs_diff_1d(a, b)
        exx = _mean_abs_diff_1d(a, a)
        eyy = _mean_abs_diff_1d(b, b)
    else:
        a = np.atleast_2d(a)
        b = np.atleast_2d(b)
        exy = float(cdist(a, b).mean())
        exx = 2.0 * float(pdist(a).sum()) / a.shape[0] ** 2 if a.shape[0] > 1 else 0.0
        eyy = 2.0 * float(pdist(b).sum()) / b.shape[0] ** 2 if b.shape[0] > 1 else 0.0
    return max(0.0, 2.0 * exy - exx - eyy)


@dataclass(frozen=True)
class CoarseGrainStep:
    step: int
    xi: float
    configuration: Configuration
    max_distance: float
    energy_distance: float


def _distances(c: Configuration, x_star):
    d = np.linalg.norm(c.points - x_star, axis=1)
    return float(d.max()), energy_distance(c.points, x_star[None, :])


def uniform_xi_sampler(low=0.0, high=1.0):
    """Scaling factors drawn uniformly from ``[low, high)``."""
    if not 0.0 <= low <= high <= 1.0:
        raise ValidationError("sampler bounds must satisfy 0 <= low <= high <= 1")
    return lambda rng: float(rng.uniform(low, high))


def coarse_grain_sequence(c: Configuration, s: ScalingSpec, k: int, xi_sampler=None, seed=None):
    """Iterate the contraction ``k`` times; step 0 is the input configuration.

    With ``xi_sampler`` each step draws its own factor from ``xi_sampler(rng)``
    instead of using ``s.xi``.
    """
    if k < 1:
        raise DomainError("need at least one iteration")
    _check_dims(c, s)
    rng = np.random.default_rng(seed)
    steps = [CoarseGrainStep(0, 1.0, c, *_distances(c, s.x_star))]
    current = c
    for i in range(1, k + 1):
        xi = s.xi if xi_sampler is None else xi_sampler(rng)
        current = scale_points(current, s.with_xi(xi))
        steps.append(CoarseGrainStep(i, xi, current, *_distances(current, s.x_star)))
    return steps
