import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from lifetime_limits.channels import DISCRETE, OutcomeDistribution, WeakPathTask, weak_path_channels
from lifetime_limits.chernoff import (
    ChernoffResult,
    chernoff_coefficient,
    chernoff_profile,
    classical_chernoff,
    perr_curve,
    quantum_chernoff_pure,
    weak_path_chernoff,
)
from lifetime_limits.decay import DomainError, pdf_exponential

from conftest import quad_half_line

XI_Q = -math.log(0.9 + 0.1 * 80 / 81)


def discrete(p):
    p = np.asarray(p, dtype=float)
    return OutcomeDistribution(DISCRETE, tuple(str(i) for i in range(len(p))), pmf=p)


def brute_force_xi(pa, pb, n=20001):
    s = np.linspace(1e-9, 1 - 1e-9, n)
    vals = [math.fsum(np.where((pa > 0) & (pb > 0), pa**x * pb ** (1 - x), 0.0)) for x in s]
    return -math.log(min(vals))


pmfs = st.lists(st.floats(0.01, 1.0), min_size=2, max_size=6).map(lambda v: np.array(v) / sum(v))


@given(pmfs, pmfs)
def test_discrete_exponent_matches_brute_force(pa, pb):
    n = min(len(pa), len(pb))
    pa, pb = pa[:n] / pa[:n].sum(), pb[:n] / pb[:n].sum()
    res = classical_chernoff(discrete(pa), discrete(pb))
    assert res.xi == pytest.approx(brute_force_xi(pa, pb), abs=1e-7)


@given(pmfs, st.floats(0.01, 0.99))
def test_coefficient_bounded_by_one(p, s):
    q = p[::-1]
    assert chernoff_coefficient(discrete(p), discrete(q), s) <= 1.0 + 1e-12


@given(pmfs)
def test_identical_distributions_are_indistinguishable(p):
    assert classical_chernoff(discrete(p), discrete(p)).xi == pytest.approx(0.0, abs=1e-12)


def test_bhattacharyya_coefficient_of_direct_scheme():
    a, b = weak_path_channels("direct")
    oracle = quad_half_line(
        lambda t: math.sqrt(pdf_exponential(t, 1.0) * (0.9 * pdf_exponential(t, 1.0) + 0.1 * pdf_exponential(t, 1.25))),
        1.25,
    )
    assert chernoff_coefficient(a, b, 0.5) == pytest.approx(oracle, rel=1e-10)


def test_disjoint_support_gives_infinite_exponent():
    res = classical_chernoff(discrete([1.0, 0.0]), discrete([0.0, 1.0]))
    assert res.xi == math.inf


def test_support_mismatch_uses_endpoint_limit():
    # pA has support on outcome 0 only; C(0+) = pB[0]
    res = classical_chernoff(discrete([1.0, 0.0]), discrete([0.7, 0.3]))
    assert res.xi == pytest.approx(-math.log(0.7), rel=1e-12)
    assert res.s_star == 0.0


def test_quantum_exponent_closed_form():
    assert quantum_chernoff_pure().xi == pytest.approx(XI_Q, abs=1e-12)
    assert quantum_chernoff_pure(WeakPathTask(tau_B=1.0)).xi == pytest.approx(0.0, abs=1e-15)


@pytest.mark.parametrize("scheme", ["optimal", "wl"])
def test_projective_schemes_attain_quantum_exponent(scheme):
    assert weak_path_chernoff(scheme).xi == pytest.approx(XI_Q, abs=1e-8)


def test_scheme_ordering():
    xi = {s: weak_path_chernoff(s).xi for s in ("direct", "is", "ic", "quantum")}
    assert xi["direct"] < xi["is"]
    assert xi["direct"] < xi["ic"] <= xi["quantum"] + 1e-12


def test_direct_profile_is_convex_with_interior_minimum():
    a, b = weak_path_channels("direct")
    s = np.linspace(0.1, 0.9, 9)
    log_c = np.log(chernoff_profile(a, b, s))
    assert np.all(np.diff(log_c, 2) >= -1e-12)
    res = classical_chernoff(a, b)
    assert 0.1 < res.s_star < 0.9


def test_mismatched_structure_rejected():
    with pytest.raises(DomainError):
        chernoff_coefficient(discrete([0.5, 0.5]), discrete([0.2, 0.3, 0.5]), 0.5)


def test_perr_curve():
    np.testing.assert_allclose(perr_curve(0.01, [0, 100]), [0.5, 0.5 * math.exp(-1.0)])
    with pytest.raises(DomainError):
        perr_curve(-1.0, [1])


def test_result_validation():
    with pytest.raises(ValueError):
        ChernoffResult(-0.1, 0.5)
    with pytest.raises(ValueError):
        ChernoffResult(0.1, 1.5)
