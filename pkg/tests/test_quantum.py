import math
import time
import warnings

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from lifetime_limits.decay import ThetaParams, amplitude, amplitude_dtau
from lifetime_limits.quantum import (
    ConditioningWarning,
    DegenerateStateError,
    InfoMatrix,
    SingularInfoError,
    build_sld_basis,
    qcrb,
    qfi_matrix_analytic,
    qfi_matrix_sld,
    qfi_single,
    sld_matrix,
    sld_operators,
)

from conftest import quad_half_line


def quadrature_qfi(theta: ThetaParams) -> np.ndarray:
    """QFI from a quadrature Gram matrix and the textbook eigen-decomposition formula."""
    t0, t1 = theta.lifetimes
    raw = [
        lambda t: amplitude(t, t0),
        lambda t: amplitude(t, t1),
        lambda t: amplitude_dtau(t, t0),
        lambda t: amplitude_dtau(t, t1),
    ]
    gram = np.array([[quad_half_line(lambda t: f(t) * g(t), t1, (t0,)) for g in raw] for f in raw])
    w, u = np.linalg.eigh(gram)
    y = np.sqrt(w)[:, None] * u.T  # column j: raw vector j in an orthonormal basis
    rho = 0.5 * (np.outer(y[:, 0], y[:, 0]) + np.outer(y[:, 1], y[:, 1]))
    d0 = 0.5 * (np.outer(y[:, 2], y[:, 0]) + np.outer(y[:, 0], y[:, 2]))
    d1 = 0.5 * (np.outer(y[:, 3], y[:, 1]) + np.outer(y[:, 1], y[:, 3]))
    tb, e = theta.tau_bar, theta.eps
    derivs = [d0 / e + d1 * e, -d0 * tb / e**2 + d1 * tb]
    lam, v = np.linalg.eigh(rho)
    mats = [v.T @ d @ v for d in derivs]
    den = lam[:, None] + lam[None, :]
    live = den > 1e-10
    return np.array([[np.sum(2 * a[live] * b.T[live] / den[live]) for b in mats] for a in mats])


@pytest.mark.parametrize("tau", [0.3, 1.0, 4.0])
def test_single_lifetime_qfi_matches_fubini_study(tau):
    dpsi = lambda t: amplitude_dtau(t, tau)
    norm = quad_half_line(lambda t: dpsi(t) ** 2, tau)
    cross = quad_half_line(lambda t: dpsi(t) * amplitude(t, tau), tau)
    assert 4 * (norm - cross**2) == pytest.approx(qfi_single(tau), rel=1e-10)


@pytest.mark.parametrize("tau_bar", [0.5, 1.0, 3.0])
@pytest.mark.parametrize("eps", [1.5, 2.0, 5.0])
def test_analytic_qfi_matches_quadrature_oracle(tau_bar, eps):
    theta = ThetaParams(tau_bar, eps)
    oracle = quadrature_qfi(theta)
    k = qfi_matrix_analytic(theta).entries
    np.testing.assert_allclose(k, oracle, rtol=1e-7, atol=1e-9 / tau_bar)


@pytest.mark.parametrize("tau_bar", [0.5, 1.0, 3.0])
@pytest.mark.parametrize("eps", [1.0001, 1.01, 1.1, 2.0, 5.0, 20.0])
def test_sld_qfi_matches_analytic(tau_bar, eps):
    theta = ThetaParams(tau_bar, eps)
    sld = qfi_matrix_sld(theta).entries
    ref = qfi_matrix_analytic(theta).entries
    assert sld[0, 0] == pytest.approx(ref[0, 0], rel=1e-9)
    assert sld[1, 1] == pytest.approx(ref[1, 1], rel=1e-9)
    assert abs(sld[0, 1]) < 1e-12 / tau_bar


def test_qfi_at_degeneracy_reduces_to_single_lifetime():
    k = qfi_matrix_analytic(ThetaParams(2.0, 1.0))
    assert k["tau_bar", "tau_bar"] == pytest.approx(qfi_single(2.0))
    assert k["eps", "eps"] == pytest.approx(1.0)


@given(st.floats(0.1, 10.0), st.floats(1.0, 100.0))
def test_analytic_qfi_structure(tau_bar, eps):
    k = qfi_matrix_analytic(ThetaParams(tau_bar, eps))
    assert k["eps", "eps"] == pytest.approx(1 / eps**2)
    assert k["tau_bar", "eps"] == 0.0
    # mixing can only lose tau_bar information relative to a pure state
    assert 0.0 < k["tau_bar", "tau_bar"] * tau_bar**2 <= 1.0 + 1e-12
    tau_crb, eps_crb = qcrb(ThetaParams(tau_bar, eps))
    assert eps_crb == pytest.approx(eps)
    assert tau_crb == pytest.approx(1 / math.sqrt(k["tau_bar", "tau_bar"]))


@pytest.mark.parametrize("eps", [1.001, 1.3, 4.0])
def test_sld_basis_orthonormal(eps):
    basis = build_sld_basis(ThetaParams(1.0, eps))
    np.testing.assert_allclose(basis.basis_gram(), np.eye(4), atol=1e-13)
    assert basis.eigenvalues.sum() == pytest.approx(1.0)
    assert basis.chi == pytest.approx(2 * eps / (1 + eps**2), rel=1e-14)


@pytest.mark.parametrize("eps", [1.01, 2.0])
def test_rho_diagonal_in_sld_basis(eps):
    basis = build_sld_basis(ThetaParams(1.0, eps))
    np.testing.assert_allclose(basis.rho(), np.diag(basis.eigenvalues), atol=1e-14)


@pytest.mark.parametrize("eps", [1.01, 1.5, 3.0])
def test_sld_solves_defining_equation_and_is_hermitian(eps):
    theta = ThetaParams(1.2, eps)
    basis = build_sld_basis(theta)
    drho = basis.drho()
    rho = np.diag(basis.eigenvalues)
    for name, sld in sld_operators(theta).items():
        np.testing.assert_allclose(sld, sld.T, atol=1e-10)
        np.testing.assert_allclose(0.5 * (rho @ sld + sld @ rho), drho[name], atol=1e-12)


def test_sld_kernel_block_is_zero():
    basis = build_sld_basis(ThetaParams(1.0, 2.0))
    sld = sld_matrix(basis, basis.drho()["eps"])
    np.testing.assert_array_equal(sld[2:, 2:], 0.0)


def test_degenerate_basis_raises():
    with pytest.raises(DegenerateStateError):
        build_sld_basis(ThetaParams(1.0, 1.0))


def test_near_degenerate_basis_warns_but_stays_accurate():
    theta = ThetaParams(1.0, 1.0 + 1e-7)
    with pytest.warns(ConditioningWarning):
        k = qfi_matrix_sld(theta)
    assert k["eps", "eps"] == pytest.approx(1 / theta.eps**2, rel=1e-8)


def test_sld_runtime_grid():
    start = time.perf_counter()
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        for tb in (0.5, 1.0, 3.0):
            for e in (1.01, 1.1, 1.5, 2.0, 5.0):
                qfi_matrix_sld(ThetaParams(tb, e))
    assert time.perf_counter() - start < 10.0


def test_info_matrix_validation():
    with pytest.raises(ValueError):
        InfoMatrix(("a", "b"), [[1.0, 0.5], [0.0, 1.0]])
    with pytest.raises(ValueError):
        InfoMatrix(("a", "b"), [[1.0, 2.0], [2.0, 1.0]])
    with pytest.raises(ValueError):
        InfoMatrix(("a",), [[1.0, 0.0], [0.0, 1.0]])


def test_info_matrix_crb_handles_dead_parameter():
    m = InfoMatrix(("a", "b"), [[4.0, 0.0], [0.0, 0.0]])
    assert m.crb() == (0.5, math.inf)
    with pytest.raises(SingularInfoError):
        m.crb(allow_divergent=False)


def test_info_matrix_crb_uses_inverse_not_diagonal():
    m = InfoMatrix(("a", "b"), [[2.0, 1.0], [1.0, 2.0]])
    inv = np.linalg.inv(m.entries)
    assert m.crb() == pytest.approx(tuple(np.sqrt(np.diag(inv))))


def test_info_matrix_collinear_is_singular():
    m = InfoMatrix(("a", "b"), [[1.0, 1.0], [1.0, 1.0]])
    assert m.crb() == (math.inf, math.inf)
    with pytest.raises(SingularInfoError):
        m.crb(allow_divergent=False)
