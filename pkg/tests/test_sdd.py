import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from stochmeasure import sdd
from stochmeasure.errors import ConvergenceError, DomainError, ValidationError


def random_system(rng, volume, max_order):
    """Symmetric densities with random order weights, normalized to total mass one."""
    raw = {q: float(rng.uniform(0.1, 1.0)) for n in range(max_order + 1) for q in sdd.multisets(len(volume), n)}
    d = sdd.DensitySystem(volume, max_order, lambda q: raw[q])
    total = math.fsum(w * d(q) for n in range(max_order + 1) for q, w in sdd._ordered_weights(volume.measures, n))
    return sdd.DensitySystem(volume, max_order, lambda q: raw[q] / total)


def test_poisson_passes_validation():
    vol = sdd.Volume.uniform(1.0, 3)
    d = sdd.poisson_sdd(1.0, vol, 20)
    sub = vol.subvolume(vol.cells[:2])
    rep = sdd.validate_sdd(d, sub, 1e-8, reference=sdd.poisson_sdd(1.0, sub, 20))
    assert rep.passed
    assert max(rep.empty_volume_residual, rep.consistency_residual, rep.normalization_residual) < 1e-12
    assert not rep.truncation_warning


def test_poisson_four_cells_two_cell_subvolume():
    vol = sdd.Volume.uniform(1.0, 4)
    sub = vol.subvolume(vol.cells[:2])
    rep = sdd.validate_sdd(sdd.poisson_sdd(1.0, vol, 20), sub, 1e-8, reference=sdd.poisson_sdd(1.0, sub, 20))
    assert rep.passed
    assert max(rep.empty_volume_residual, rep.consistency_residual, rep.normalization_residual) < 1e-8


def test_empty_density_below_one_fails():
    vol = sdd.Volume.uniform(1.0, 1)
    rep = sdd.validate_sdd(sdd.DensitySystem(vol, 0, {0: [0.9]}), vol)
    assert not rep.passed
    assert rep.empty_volume_residual == pytest.approx(0.1)


def test_single_cell_two_term_normalization():
    vol = sdd.Volume([0.25])
    d = sdd.DensitySystem(vol, 1, {0: [0.5], 1: [2.0]})
    rep = sdd.validate_sdd(d, vol, 1e-12)
    assert rep.normalization_residual < 1e-12 and rep.empty_volume_residual < 1e-12
    assert rep.consistency_residual < 1e-12 and rep.passed


def test_truncated_system_flagged():
    vol = sdd.Volume.uniform(1.0, 2)
    d = sdd.DensitySystem(vol, 1, {0: [0.5], 1: [0.5, 0.5]})
    rep = sdd.validate_sdd(d, vol)
    assert rep.passed
    assert rep.truncation_warning and rep.notes


def test_unnormalized_system_fails():
    vol = sdd.Volume.uniform(1.0, 2)
    d = sdd.DensitySystem(vol, 1, {0: [0.6], 1: [0.5, 0.5]})
    rep = sdd.validate_sdd(d, vol)
    assert not rep.passed
    assert rep.normalization_residual == pytest.approx(0.1)


def test_marginal_of_poisson_is_poisson():
    vol = sdd.Volume((0.2, 0.3, 0.5))
    d = sdd.poisson_sdd(0.8, vol, 20)
    sub = vol.subvolume(["0", "2"])
    m = sdd.marginal(d, sub)
    ref = sdd.poisson_sdd(0.8, sub, 20)
    for n in range(5):
        for q in sdd.multisets(2, n):
            assert m(q) == pytest.approx(ref(q), rel=1e-12)


@pytest.mark.parametrize("z", [0.3, 1.0, 2.5])
def test_poisson_correlations_are_powers(z):
    vol = sdd.Volume.uniform(1.0 / z, 2)
    d = sdd.poisson_sdd(z, vol, 25)
    for n in range(4):
        for q, v in sdd.correlation_from_sdd(d, n).items():
            assert v == pytest.approx(z**n, rel=1e-10)


def test_round_trip_poisson():
    vol = sdd.Volume.uniform(1.0, 3)
    d = sdd.poisson_sdd(1.0, vol, 20)
    back = sdd.density_from_correlation(sdd.correlation_table(d))
    err = max(abs(back(q) - d(q)) for n in range(21) for q in sdd.multisets(3, n))
    assert err < 1e-8


def test_round_trip_random_finite_system(rng):
    vol = sdd.Volume((0.3, 0.7))
    d = random_system(rng, vol, 4)
    back = sdd.density_from_correlation(sdd.correlation_table(d), tol=1e-12)
    for n in range(5):
        for q in sdd.multisets(2, n):
            assert back(q) == pytest.approx(d(q), rel=1e-11, abs=1e-14)


def test_brute_force_matches_series(rng):
    vol = sdd.Volume((0.2, 0.5, 0.3))
    d = random_system(rng, vol, 4)
    rho = sdd.correlation_table(d)
    for n in range(4):
        for q in sdd.multisets(3, n):
            assert abs(sdd.brute_force_correlation(d, q) - rho(q)) < 1e-12


def test_complete_table_reports_no_truncation():
    vol = sdd.Volume.uniform(1.0, 2)
    d = sdd.DensitySystem(vol, 2, {0: [0.2], 1: [0.2, 0.2], 2: [0.2, 0.4, 0.2]})
    entries = sdd.sdd_from_correlation(sdd.correlation_table(d), 0)
    assert entries.truncation == 0.0
    assert entries.values[()] == pytest.approx(0.2, rel=1e-14)


def test_inversion_refuses_unconverged_series():
    vol = sdd.Volume.uniform(1.0, 1)
    rho = sdd.CorrelationTable(vol, 3, {n: [5.0**n] for n in range(4)})
    with pytest.raises(ConvergenceError):
        sdd.sdd_from_correlation(rho, 0, tol=1e-8)


@given(z=st.floats(0.1, 3.0))
def test_empty_volume_mass_equals_one(z):
    vol = sdd.Volume.uniform(1.0, 2)
    rep = sdd.validate_sdd(sdd.poisson_sdd(z, vol, 40), vol)
    assert rep.empty_volume_residual < 1e-10


def test_json_round_trip():
    vol = sdd.Volume((0.4, 0.6), ("a", "b"))
    d = sdd.poisson_sdd(1.2, vol, 20)
    back = sdd.from_json(sdd.to_json(d))
    assert isinstance(back, sdd.DensitySystem)
    assert back.volume == vol
    assert all(back(q) == d(q) for n in range(21) for q in sdd.multisets(2, n))


def test_json_keeps_completeness():
    d = sdd.poisson_sdd(1.0, sdd.Volume.uniform(1.0, 1), 20)
    back = sdd.from_json(sdd.to_json(sdd.correlation_table(d)))
    assert isinstance(back, sdd.CorrelationTable) and back.complete
    assert back((0, 0)) == pytest.approx(1.0, rel=1e-12)


def test_asymmetric_tables_rejected():
    vol = sdd.Volume.uniform(1.0, 2)
    with pytest.raises(ValidationError):
        sdd.DensitySystem(vol, 2, {2: {(0, 1): 0.1, (1, 0): 0.2}})


@pytest.mark.parametrize("measures", [(), (1.0, -0.5), (math.inf,)])
def test_bad_volumes(measures):
    with pytest.raises(ValidationError):
        sdd.Volume(measures)


def test_poisson_tail_too_heavy():
    with pytest.raises(DomainError):
        sdd.poisson_sdd(10.0, sdd.Volume.uniform(1.0, 1), 5)


def test_unknown_subvolume_cell():
    vol = sdd.Volume.uniform(1.0, 2)
    with pytest.raises(DomainError):
        vol.subvolume(["zz"])
