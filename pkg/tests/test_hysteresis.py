import math

import numpy as np
import pytest

from stochmeasure.errors import DomainError, ValidationError
from stochmeasure.hysteresis import (
    DriveCycle,
    closed_form_area,
    coupling_criterion,
    frequency_scan,
    loop_area,
    parse_omega_scan,
    phase_lag,
    run_cycle,
    susceptibility,
)
from stochmeasure.measures import MemoryKernel
from stochmeasure.paths import SampledPath
from stochmeasure.response import ResponseModel

UNIT = ResponseModel(1.0, MemoryKernel.exponential(1.0, 1.0))


def test_unit_cycle_amplitude_area_and_lag():
    r = run_cycle(UNIT, DriveCycle(1.0, 1.0))
    assert r.converged
    lo, hi = r.window
    assert hi - lo == 200
    m = r.response.values[lo:hi + 1]
    assert abs(0.5 * np.ptp(m) - 1 / math.sqrt(2)) < 1e-3
    area = loop_area(r.drive, r.response, r.window)
    assert abs(abs(area) - math.pi / 2) < 1e-3
    assert phase_lag(r.drive, r.response, 1.0, r.window) == pytest.approx(math.pi / 4, abs=1e-3)


def test_delta_loop_degenerate():
    m = ResponseModel(2.0, MemoryKernel.delta())
    r = run_cycle(m, DriveCycle(1.5, 3.0))
    assert abs(loop_area(r.drive, r.response, r.window)) < 1e-10
    assert abs(phase_lag(r.drive, r.response, 3.0, r.window)) < 1e-12


@pytest.mark.parametrize("wt", np.geomspace(0.1, 10, 7))
def test_area_closed_form(wt):
    r = run_cycle(UNIT, DriveCycle(0.8, wt))
    area = loop_area(r.drive, r.response, r.window)
    assert area == pytest.approx(closed_form_area(UNIT, 0.8, wt), rel=1e-3)


def test_orientation_flips_sign():
    r = run_cycle(UNIT, DriveCycle(1.0, 2.0))
    lo, hi = r.window
    rev = lambda p: SampledPath(0.0, p.dt, p.values[lo:hi + 1][::-1])
    assert loop_area(rev(r.drive), rev(r.response)) == pytest.approx(-loop_area(r.drive, r.response, r.window),
                                                                     rel=1e-14)


def test_quasi_static_limit():
    areas = [abs(frequency_scan(UNIT, 1.0, [w])[0].area) for w in (1.0, 0.1, 0.01)]
    assert areas[0] > areas[1] > areas[2]
    slow = run_cycle(UNIT, DriveCycle(1.0, 0.01))
    lo, hi = slow.window
    gap = np.max(np.abs(slow.response.values[lo:hi + 1] - slow.drive.values[lo:hi + 1]))
    assert gap < 0.011


def test_area_peaks_near_matched_times():
    omegas = np.geomspace(0.05, 20, 25)
    rows = frequency_scan(UNIT, 1.0, omegas)
    best = omegas[int(np.argmax([abs(r.area) for r in rows]))]
    assert 1 / 1.5 <= best <= 1.5


def test_window_must_close():
    r = run_cycle(UNIT, DriveCycle(1.0, 1.0))
    lo, hi = r.window
    with pytest.raises(DomainError):
        loop_area(r.drive, r.response, (lo, hi - 50))


def test_misaligned_paths():
    a = SampledPath(0.0, 0.1, np.sin(np.arange(64) * 0.1))
    with pytest.raises(DomainError):
        loop_area(a, SampledPath(0.0, 0.1, np.zeros(10)))


def test_drive_cycle_validation_and_snapping():
    d = DriveCycle(1.0, 1.0, 2, dt=0.01)
    assert d.samples_per_period == math.ceil(2 * math.pi / 0.01 - 1e-9)
    assert d.period / d.dt == pytest.approx(d.samples_per_period, rel=1e-12)
    for kw in (dict(omega=0.0), dict(periods=1), dict(dt=0.1)):
        args = dict(amplitude=1.0, omega=1.0, periods=2)
        args.update(kw)
        with pytest.raises(ValidationError):
            DriveCycle(**args)


def test_susceptibility_forms():
    assert susceptibility(UNIT, 1.0) == pytest.approx(0.5 - 0.5j)
    assert susceptibility(ResponseModel(3.0, MemoryKernel.delta()), 5.0) == 3.0
    with pytest.raises(DomainError):
        susceptibility(ResponseModel(1.0, MemoryKernel.gaussian()), 1.0)


def test_coupling_classes():
    k = MemoryKernel.ou(1.0, 1.0)
    assert coupling_criterion([1.0], k).classes == ("coupled",)
    assert coupling_criterion([1e3], k).classes == ("enslaved",)
    rep = coupling_criterion([100.0, 0.01, 1.0], k)
    assert rep.hierarchy == (0.01, 1.0, 100.0)
    assert rep.classes == ("enslaved", "decoupled", "coupled")


def test_coupling_window_configurable_and_delta():
    k = MemoryKernel.ou(1.0, 1.0)
    assert coupling_criterion([5.0], k, window=(0.5, 2.0)).classes == ("enslaved",)
    rep = coupling_criterion([1.0, 2.0], MemoryKernel.delta())
    assert rep.classes == ("decoupled", "decoupled") and rep.note
    with pytest.raises(DomainError):
        coupling_criterion([0.0], k)


def test_omega_scan_parsing():
    grid = parse_omega_scan("0.01:100:log25")
    assert grid.size == 25 and grid[0] == pytest.approx(0.01) and grid[-1] == pytest.approx(100)
    assert parse_omega_scan("1:2:lin3").tolist() == [1.0, 1.5, 2.0]
    for bad in ("1:2", "2:1:log3", "1:2:cub3", "1:2:log1"):
        with pytest.raises(ValidationError):
            parse_omega_scan(bad)
