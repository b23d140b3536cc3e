import math

import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy import integrate as sp

from stochmeasure.errors import DivergenceError, DomainError, ValidationError
from stochmeasure.measures import (
    KernelKind,
    MemoryKernel,
    asymptotic_amplitude,
    eval_kernel,
    format_kernel,
    parse_kernel,
    stochastic_time,
)

SHAPED = ["exp", "ou", "gauss", "lorentz"]


@pytest.mark.parametrize("kind", SHAPED)
def test_unit_value_at_zero_lag(kind):
    assert eval_kernel(MemoryKernel(kind, 2.5, 0.3), 0.0) == pytest.approx(2.5)


@pytest.mark.parametrize("kind", SHAPED)
def test_kernels_decay(kind):
    k = MemoryKernel(kind, 1.0, 1.0)
    u = np.linspace(0, 20, 201)
    assert np.all(np.diff(k(u)) < 0)


def test_delta_evaluates_to_zero_and_has_zero_time():
    k = MemoryKernel.delta(3.0)
    assert eval_kernel(k, 0.0) == 0.0
    assert stochastic_time(k) == 0.0
    assert asymptotic_amplitude(k, 0.4) == 3.0


@pytest.mark.parametrize("u", [-1e-12, math.nan, math.inf])
def test_bad_lag(u):
    with pytest.raises(DomainError):
        eval_kernel(MemoryKernel.ou(), u)


@pytest.mark.parametrize("args", [("exp", 1.0, 0.0), ("ou", -1.0, 1.0), ("delta", 1.0, 0.5), ("gauss", math.nan, 1.0)])
def test_invalid_kernels(args):
    with pytest.raises(ValidationError):
        MemoryKernel(*args)


@pytest.mark.parametrize("n", [0.1, 0.3, 0.5, 0.7, 0.9])
def test_ou_amplitude_closed_form(n):
    assert asymptotic_amplitude(MemoryKernel.ou(), n) == pytest.approx(1.0 / (1.0 - n), rel=1e-12, abs=1e-8)


@given(amp=st.floats(0.1, 10), tau=st.floats(0.05, 5), frac=st.floats(0.01, 0.95))
def test_exponential_amplitude_scaling(amp, tau, frac):
    n = frac / tau
    got = asymptotic_amplitude(MemoryKernel.exponential(amp, tau), n)
    assert got == pytest.approx(amp * tau / (1.0 - n * tau), rel=1e-10)


@pytest.mark.parametrize("n,tau", [(0.5, 1.0), (2.0, 1.5), (1e-3, 0.2)])
def test_gaussian_amplitude_against_scipy(n, tau):
    ref, _ = sp.quad(lambda u: math.exp(n * u - (u / tau) ** 2), 0, np.inf, epsabs=0, epsrel=1e-13)
    assert asymptotic_amplitude(MemoryKernel.gaussian(1.0, tau), n) == pytest.approx(ref, rel=1e-10)


def test_small_rate_approaches_mass():
    k = MemoryKernel.gaussian(1.0, 1.0)
    kappa = asymptotic_amplitude(k, 1e-6)
    assert abs(kappa / k.mass() - 1.0) < 1e-6


@pytest.mark.parametrize("kernel,n", [(MemoryKernel.ou(), 1.0), (MemoryKernel.exponential(1.0, 2.0), 0.6),
                                      (MemoryKernel.lorentzian(), 0.1)])
def test_divergent_amplitudes(kernel, n):
    with pytest.raises(DivergenceError):
        asymptotic_amplitude(kernel, n)


@pytest.mark.parametrize("n", [0.0, -0.5, math.inf])
def test_rate_must_be_positive(n):
    with pytest.raises(DomainError):
        asymptotic_amplitude(MemoryKernel.ou(), n)


@pytest.mark.parametrize("kind", SHAPED)
def test_shape_tail_matches_integral(kind):
    k = MemoryKernel(kind, 1.0, 1.0)
    ref, _ = sp.quad(lambda s: float(k.shape(s)), 0.7, np.inf, epsabs=0, epsrel=1e-12)
    assert float(k.shape_tail(0.7)) == pytest.approx(ref, rel=1e-9)


@pytest.mark.parametrize("text,kind,amp,tau", [
    ("ou:1:1", KernelKind.ORNSTEIN_UHLENBECK, 1.0, 1.0),
    ("exponential:2:0.5", KernelKind.EXPONENTIAL, 2.0, 0.5),
    ("delta", KernelKind.DELTA, 1.0, 0.0),
    ("Gaussian:3", KernelKind.GAUSSIAN, 3.0, 1.0),
])
def test_parse_kernel(text, kind, amp, tau):
    k = parse_kernel(text)
    assert (k.kind, k.amplitude, k.stochastic_time) == (kind, amp, tau)
    assert parse_kernel(format_kernel(k)) == k


@pytest.mark.parametrize("text", ["boxcar:1:1", "ou:x:1", "ou:1:1:1", "delta:1:2"])
def test_parse_kernel_rejects(text):
    with pytest.raises(ValidationError):
        parse_kernel(text)
