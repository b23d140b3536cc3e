"""Hysteresis loops of a memory response under sinusoidal driving.

The loop area ``oint M dH`` over one steady period measures the work lost per
cycle.  For exponential memory the steady response to ``A sin(wt)`` is the
phasor ``chi(w) = chi_ne tau / (1 + i w tau)``, giving
``oint M dH = -pi A^2 chi''(w)`` with ``chi'' = chi_ne w tau^2 / (1 + w^2 tau^2)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, ValidationError
from .measures import MemoryKernel
from .paths import SampledPath
from .response import ResponseModel, respond

__all__ = [
    "DriveCycle",
    "CycleResult",
    "run_cycle",
    "loop_area",
    "phase_lag",
    "susceptibility",
    "closed_form_area",
    "ScanRow",
    "frequency_scan",
    "CouplingReport",
    "coupling_criterion",
    "parse_omega_scan",
]

MIN_SAMPLES_PER_PERIOD = 200
STEADY_RTOL = 1e-6
MIN_PERIOD_CAP = 10
CAP_RELAXATION_TIMES = 30.0


@dataclass(frozen=True)
class DriveCycle:
    """Sinusoidal drive ``amplitude * sin(omega t)`` sampled from ``t = 0``.

    ``dt`` is shrunk to the nearest value that divides the period exactly so
    every period has the same integer number of samples.
    """

    amplitude: float
    omega: float
    periods: int = 2
    dt: float | None = None

    def __post_init__(self):
        if not (math.isfinite(self.amplitude) and math.isfinite(self.omega)):
            raise ValidationError("amplitude and omega must be finite")
        if self.omega <= 0:
            raise ValidationError(f"omega must be > 0, got {self.omega}")
        if int(self.periods) != self.periods or self.periods < 2:
            raise ValidationError(f"periods must be an integer >= 2, got {self.periods}")
        period = 2.0 * math.pi / self.omega
        dt = period / MIN_SAMPLES_PER_PERIOD if self.dt is None else float(self.dt)
        if not dt > 0:
            raise ValidationError(f"dt must be > 0, got {dt}")
        if dt > period / MIN_SAMPLES_PER_PERIOD * (1 + 1e-12):
            raise ValidationError(
                f"dt={dt:g} gives fewer than {MIN_SAMPLES_PER_PERIOD} samples per period"
            )
        object.__setattr__(self, "periods", int(self.periods))
        object.__setattr__(self, "dt", period / math.ceil(period / dt - 1e-9))

    @property
    def period(self):
        return 2.0 * math.pi / self.omega

    @property
    def samples_per_period(self):
        return int(round(self.period / self.dt))

    def path(self, periods=None):
        periods = self.periods if periods is None else periods
        n = periods * self.samples_per_period + 1
        t = self.dt * np.arange(n)
        return SampledPath(0.0, self.dt, self.amplitude * np.sin(self.omega * t))


@dataclass(frozen=True)
class CycleResult:
    drive: SampledPath
    response: SampledPath
    window: tuple
    periods_run: int
    converged: bool
    period_change: float


def _period_change(values, spp):
    last = values[-spp - 1:]
    prev = values[-2 * spp - 1: -spp]
    scale = max(float(np.max(np.abs(last))), 1e-300)
    return float(np.max(np.abs(last - prev))) / scale


def run_cycle(m: ResponseModel, d: DriveCycle) -> CycleResult:
    """Drive ``m`` until consecutive periods agree to ``1e-6`` and return the last one.

    Runs at least ``d.periods`` periods and doubles the count until the
    response settles or a cap of ``max(10 periods, 30 tau)`` is reached.
    """
    k = m.kernel
    if not k.is_delta and d.dt > k.stochastic_time / 10.0:
        d = DriveCycle(d.amplitude, d.omega, d.periods, k.stochastic_time / 10.0)
    spp = d.samples_per_period
    cap = MIN_PERIOD_CAP
    if not k.is_delta:
        cap = max(cap, math.ceil(CAP_RELAXATION_TIMES * k.stochastic_time / d.period))
    cap = max(cap, d.periods)
    periods = d.periods
    while True:
        drive = d.path(periods)
        resp = respond(m, drive)
        change = _period_change(resp.values, spp)
        if change < STEADY_RTOL or periods >= cap:
            break
        periods = min(cap, 2 * periods)
    n = len(drive)
    return CycleResult(drive, resp, (n - 1 - spp, n - 1), periods, change < STEADY_RTOL, change)


def _window(drive, response, window):
    if len(drive) != len(response) or abs(drive.dt - response.dt) > 1e-12 * drive.dt:
        raise DomainError("drive and response paths are not aligned")
    lo, hi = (0, len(drive) - 1) if window is None else window
    if not 0 <= lo < hi < len(drive):
        raise DomainError(f"window {window} outside the path")
    return drive.values[lo: hi + 1], response.values[lo: hi + 1]


def _check_closed(x, what):
    span = float(np.ptp(x))
    if span > 0 and abs(x[-1] - x[0]) > 0.01 * span:
        raise DomainError(f"{what} endpoints differ by more than 1% of its range; window is not a whole period")


def loop_area(drive: SampledPath, response: SampledPath, window=None) -> float:
    """Signed ``oint M dH`` over ``window = (first, last)`` sample indices, trapezoid rule."""
    h, mv = _window(drive, response, window)
    _check_closed(h, "drive")
    _check_closed(mv, "response")
    return float(0.5 * np.sum((mv[1:] + mv[:-1]) * np.diff(h)))


def _phasor(x, omega, dt):
    # one whole period, endpoint excluded, so the rectangle rule is exact for harmonics
    t = dt * np.arange(x.size - 1)
    return np.sum(x[:-1] * np.exp(-1j * omega * t))


def phase_lag(drive: SampledPath, response: SampledPath, omega: float, window=None) -> float:
    """Angle by which the response trails the drive at ``omega``, in ``(-pi, pi]``."""
    h, mv = _window(drive, response, window)
    ph, pm = _phasor(h, omega, drive.dt), _phasor(mv, omega, drive.dt)
    if abs(ph) == 0:
        raise DomainError("drive has no component at omega")
    if abs(pm) == 0:
        return 0.0
    return float(np.angle(ph / pm))


def susceptibility(m: ResponseModel, omega: float) -> complex:
    """Steady-state phasor gain ``M / H`` at ``omega``."""
    k = m.kernel
    if k.is_delta:
        return complex(m.chi_ne)
    if not k.is_exponential_family:
        raise DomainError(f"no closed-form susceptibility for {k.kind.value} memory")
    tau = k.stochastic_time
    return m.chi_ne * tau / complex(1.0, omega * tau)


def closed_form_area(m: ResponseModel, amplitude: float, omega: float) -> float:
    """``-pi A^2 chi''(omega)``, the steady value of :func:`loop_area`."""
    return math.pi * amplitude**2 * susceptibility(m, omega).imag


@dataclass(frozen=True)
class ScanRow:
    omega: float
    area: float
    phase_lag: float
    response_amplitude: float
    converged: bool


def frequency_scan(m: ResponseModel, amplitude: float, omegas, periods=2):
    rows = []
    for w in omegas:
        res = run_cycle(m, DriveCycle(amplitude, float(w), periods))
        lo, hi = res.window
        h, mv = _window(res.drive, res.response, res.window)
        gain = abs(_phasor(mv, w, res.drive.dt)) * 2.0 / (mv.size - 1)
        rows.append(ScanRow(
            float(w),
            loop_area(res.drive, res.response, res.window),
            phase_lag(res.drive, res.response, w, res.window),
            float(gain),
            res.converged,
        ))
    return rows


def parse_omega_scan(text):
    """``lo:hi:logN`` (geometric) or ``lo:hi:linN`` (uniform) grid with ``N`` points."""
    try:
        lo, hi, mode = str(text).split(":")
        lo, hi = float(lo), float(hi)
        kind, count = mode[:3], int(mode[3:])
    except ValueError:
        raise ValidationError(f"omega scan must look like 0.01:100:log25, got {text!r}") from None
    if not (0 < lo < hi) or count < 2 or kind not in ("log", "lin"):
        raise ValidationError(f"bad omega scan {text!r}: need 0 < lo < hi, N >= 2, log or lin")
    return np.geomspace(lo, hi, count) if kind == "log" else np.linspace(lo, hi, count)


@dataclass(frozen=True)
class CouplingReport:
    classes: tuple      # one label per input time, input order
    ratios: tuple
    hierarchy: tuple    # times sorted ascending
    note: str = ""


def coupling_criterion(process_times, kernel: MemoryKernel, window=(0.1, 10.0)) -> CouplingReport:
    """Label each relaxation time against the kernel's stochastic time.

    Ratio inside ``window`` is ``coupled``; above it ``enslaved`` (the process
    is slaved to the faster measure); below it ``decoupled``.
    """
    times = tuple(float(t) for t in process_times)
    if not times or any(not (math.isfinite(t) and t > 0) for t in times):
        raise DomainError("relaxation times must be finite and > 0")
    lo, hi = window
    if not 0 < lo <= hi:
        raise ValidationError(f"coupling window must satisfy 0 < lo <= hi, got {window}")
    hierarchy = tuple(sorted(times))
    if kernel.is_delta:
        return CouplingReport(
            ("decoupled",) * len(times), (math.inf,) * len(times), hierarchy,
            "delta memory has zero stochastic time; every process is slower than the measure",
        )
    ratios = tuple(t / kernel.stochastic_time for t in times)
    classes = tuple("coupled" if lo <= r <= hi else "enslaved" if r > hi else "decoupled" for r in ratios)
    return CouplingReport(classes, ratios, hierarchy)
