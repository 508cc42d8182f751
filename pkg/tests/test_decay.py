import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy import special

from lifetime_limits.decay import (
    DecayMixture,
    DomainError,
    ThetaParams,
    amplitude,
    amplitude_dtau,
    laguerre,
    mixture_cdf,
    mixture_pdf,
    overlap,
    overlap_moment,
    pdf_exponential,
    wl_mode,
    wl_overlap,
    wl_overlap_dtau,
    wl_phase,
    wl_spectrum,
    wl_truncation,
    WlSpectrumPoint,
)

from conftest import quad_half_line

lifetimes = st.floats(0.05, 20.0)
eps_values = st.floats(1.0, 50.0)


@pytest.mark.parametrize("tau", [0.1, 1.0, 7.5])
def test_amplitude_normalized(tau):
    assert quad_half_line(lambda t: amplitude(t, tau) ** 2, tau) == pytest.approx(1.0, abs=1e-12)


def test_amplitude_vanishes_before_zero():
    assert amplitude(-0.3, 1.0) == 0.0
    assert pdf_exponential(-1.0, 2.0) == 0.0


def test_bad_lifetime_rejected():
    for bad in (0.0, -1.0, math.nan, math.inf):
        with pytest.raises(DomainError):
            amplitude(1.0, bad)


@pytest.mark.parametrize("ta,tb", [(1.0, 1.0), (0.5, 2.0), (1.0, 1.25), (0.2, 9.0)])
def test_overlap_matches_quadrature(ta, tb):
    oracle = quad_half_line(lambda t: amplitude(t, ta) * amplitude(t, tb), max(ta, tb), (min(ta, tb),))
    assert overlap(ta, tb) == pytest.approx(oracle, rel=1e-12)


@pytest.mark.parametrize("k", range(5))
@pytest.mark.parametrize("ta,tb", [(0.5, 2.0), (1.0, 1.1)])
def test_overlap_moments_match_quadrature(k, ta, tb):
    oracle = quad_half_line(lambda t: t**k * amplitude(t, ta) * amplitude(t, tb), max(ta, tb))
    assert overlap_moment(k, ta, tb) == pytest.approx(oracle, rel=1e-11)


@given(lifetimes, lifetimes)
def test_overlap_symmetric_and_bounded(a, b):
    c = overlap(a, b)
    assert c == pytest.approx(overlap(b, a), rel=1e-15)
    assert 0.0 < c <= 1.0 + 1e-15


@given(lifetimes)
def test_overlap_of_identical_states_is_one(tau):
    assert overlap(tau, tau) == pytest.approx(1.0, rel=1e-15)


def test_amplitude_dtau_matches_central_difference():
    t = np.linspace(0.0, 8.0, 41)
    h = 1e-6
    fd = (amplitude(t, 1.3 + h) - amplitude(t, 1.3 - h)) / (2 * h)
    np.testing.assert_allclose(amplitude_dtau(t, 1.3), fd, atol=1e-9)


@pytest.mark.parametrize("n", range(8))
def test_laguerre_matches_scipy(n):
    x = np.linspace(0.0, 30.0, 61)
    np.testing.assert_allclose(laguerre(n, x), special.eval_laguerre(n, x), rtol=1e-12, atol=1e-12)


@pytest.mark.parametrize("tau_bar", [0.5, 2.0])
def test_wl_modes_orthonormal(tau_bar):
    for n in range(5):
        for m in range(n, 5):
            val = quad_half_line(lambda t: wl_mode(n, t, tau_bar) * wl_mode(m, t, tau_bar), tau_bar)
            assert val == pytest.approx(float(n == m), abs=1e-11)


@pytest.mark.parametrize("n", range(6))
@pytest.mark.parametrize("tau_ref,tau", [(1.0, 1.0), (1.0, 0.7), (2.0, 3.0)])
def test_wl_overlap_matches_quadrature(n, tau_ref, tau):
    oracle = quad_half_line(lambda t: wl_mode(n, t, tau_ref) * amplitude(t, tau), max(tau, tau_ref))
    assert wl_overlap(n, tau_ref, tau) == pytest.approx(oracle, abs=1e-12)


@pytest.mark.parametrize("n", range(4))
def test_wl_overlap_dtau_matches_central_difference(n):
    h = 1e-6
    fd = (wl_overlap(n, 1.0, 1.4 + h) - wl_overlap(n, 1.0, 1.4 - h)) / (2 * h)
    assert wl_overlap_dtau(n, 1.0, 1.4) == pytest.approx(fd, abs=1e-9)


@given(lifetimes, lifetimes)
def test_wl_overlaps_form_a_complete_decomposition(tau_ref, tau):
    ratio = ((tau_ref - tau) / (tau_ref + tau)) ** 2
    n_max = wl_truncation(ratio, 1e-15)
    total = math.fsum(wl_overlap(n, tau_ref, tau) ** 2 for n in range(n_max + 1))
    assert total == pytest.approx(1.0, abs=1e-13)


def test_wl_spectrum_and_phase_step_consistent():
    for w in (-2.0, 0.0, 0.4, 3.0):
        point = WlSpectrumPoint.at(w, 1.5)
        for n in range(4):
            ratio = wl_spectrum(n + 1, w, 1.5) / wl_spectrum(n, w, 1.5)
            assert abs(ratio) == pytest.approx(1.0, rel=1e-14)
            assert ratio == pytest.approx(point.phase_factor, abs=1e-13)


def test_wl_phase_limits():
    assert wl_phase(0.0, 1.0) == pytest.approx(math.pi)
    assert abs(wl_phase(1e6, 1.0)) < 1e-5


@given(lifetimes, eps_values)
def test_theta_roundtrip(tau_bar, eps):
    theta = ThetaParams(tau_bar, eps)
    back = ThetaParams.from_lifetimes(theta.tau1, theta.tau0)
    assert back.tau_bar == pytest.approx(tau_bar, rel=1e-12)
    assert back.eps == pytest.approx(eps, rel=1e-12)
    assert theta.tau0 * theta.tau1 == pytest.approx(tau_bar**2, rel=1e-12)


@pytest.mark.parametrize("tau_bar,eps", [(1.0, 0.99), (0.0, 2.0), (1.0, math.nan)])
def test_theta_domain(tau_bar, eps):
    with pytest.raises(DomainError):
        ThetaParams(tau_bar, eps)


def test_mixture_pdf_and_cdf():
    theta = ThetaParams(1.0, 2.0)
    assert quad_half_line(lambda t: mixture_pdf(t, theta), 2.0, (0.5,)) == pytest.approx(1.0, abs=1e-12)
    assert mixture_cdf(0.0, theta) == 0.0
    assert mixture_cdf(1e4, theta) == pytest.approx(1.0)
    t = 1.7
    oracle = 1.0 - 0.5 * math.exp(-t / 0.5) - 0.5 * math.exp(-t / 2.0)
    assert mixture_cdf(t, theta) == pytest.approx(oracle, rel=1e-14)


def test_mixture_validation():
    with pytest.raises(DomainError):
        DecayMixture(((0.5, 1.0), (0.6, 2.0)))
    with pytest.raises(DomainError):
        DecayMixture(())


@given(st.floats(0.0, 0.99))
def test_wl_truncation_meets_tolerance(ratio):
    n = wl_truncation(ratio, 1e-14)
    assert ratio ** (n + 1) / (1 - ratio) < 1e-14 or ratio == 0.0
    if n > 0:
        assert ratio**n / (1 - ratio) >= 1e-14


def test_wl_truncation_cap():
    with pytest.raises(DomainError):
        wl_truncation(0.99999, 1e-14, cap=100)
