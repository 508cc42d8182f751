"""Quantum Fisher information for single- and bi-exponential one-photon states.

The mixed-state QFI is built from symmetric logarithmic derivatives (SLDs)
expressed in a four-vector eigenbasis of the density operator.  Every
inner product goes through the closed-form decay moments,
so no numerical integration or differentiation is involved.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import mpmath
import numpy as np

from .decay import DomainError, ThetaParams, check_lifetime, moment_closed_form

PARAM_LABELS = ("tau_bar", "eps")
NEAR_DEGENERATE = 1e-6


class DegenerateStateError(DomainError):
    """The two mixture components coincide, so the SLD eigenbasis is undefined."""


class ConditioningWarning(RuntimeWarning):
    pass


class SingularInfoError(np.linalg.LinAlgError):
    pass


@dataclass(frozen=True)
class InfoMatrix:
    """Symmetric Fisher-information matrix with named parameters."""

    labels: tuple[str, ...]
    entries: np.ndarray = field(repr=False)

    def __post_init__(self):
        m = np.array(self.entries, dtype=float, ndmin=2)
        if m.shape != (len(self.labels), len(self.labels)):
            raise ValueError(f"shape {m.shape} does not match labels {self.labels}")
        scale = max(1.0, float(np.max(np.abs(m))))
        if np.max(np.abs(m - m.T)) > 1e-10 * scale:
            raise ValueError("information matrix is not symmetric")
        if np.min(np.linalg.eigvalsh(0.5 * (m + m.T))) < -1e-10 * scale:
            raise ValueError("information matrix is not positive semidefinite")
        m.setflags(write=False)
        object.__setattr__(self, "entries", m)

    def __getitem__(self, key) -> float:
        i, j = (self.labels.index(k) for k in key)
        return float(self.entries[i, j])

    def crb(self, allow_divergent: bool = True) -> tuple[float, ...]:
        """Square roots of the diagonal of the inverse.

        A parameter carrying no information gets ``inf``; with
        ``allow_divergent=False`` a singular matrix raises instead.
        """
        m = self.entries
        out = np.full(len(self.labels), math.inf)
        live = np.diag(m) > 0.0
        if not live.all() and not allow_divergent:
            raise SingularInfoError(f"singular information matrix {m.tolist()}")
        if live.any():
            sub = m[np.ix_(live, live)]
            if np.linalg.cond(sub) > 1e15:
                if not allow_divergent:
                    raise SingularInfoError(f"singular information matrix {m.tolist()}")
                return tuple(out)
            out[live] = np.sqrt(np.diag(np.linalg.inv(sub)))
        return tuple(float(x) for x in out)


def qfi_single(tau: float) -> float:
    """Per-photon QFI for a single lifetime; direct time-tagging attains it."""
    return 1.0 / check_lifetime(tau) ** 2


def qfi_matrix_analytic(theta: ThetaParams) -> InfoMatrix:
    e2 = theta.eps**2
    k_tt = (1.0 + 14.0 * e2**2 + e2**4) / ((1.0 + e2) ** 4 * theta.tau_bar**2)
    return InfoMatrix(PARAM_LABELS, np.diag([k_tt, 1.0 / e2]))


def qcrb(theta: ThetaParams) -> tuple[float, float]:
    return qfi_matrix_analytic(theta).crb(allow_divergent=False)


# A raw vector is a polynomial in t times psi(t; tau); these are its coefficients.
def _psi_poly(tau):
    return (1,)


def _dpsi_poly(tau):
    return (-1 / (2 * tau), 1 / (2 * tau**2))


def _inner(poly_a, tau_a, poly_b, tau_b):
    return sum(
        ca * cb * moment_closed_form(i + j, tau_a, tau_b)
        for i, ca in enumerate(poly_a)
        for j, cb in enumerate(poly_b)
    )


def _working_dps(eps: float) -> int:
    # the raw Gram matrix has condition number ~ (eps - 1)**-8
    return 40 + 10 * max(0, math.ceil(-math.log10(eps - 1.0)))


def _to_float(a) -> np.ndarray:
    return np.vectorize(float, otypes=[float])(a)


@dataclass(frozen=True)
class SldBasis:
    """Eigenbasis {e1..e4} of the bi-exponential density operator.

    ``basis_coeffs[k]`` expands ``e_{k+1}`` over the raw vectors
    ``(psi0, psi1, d psi0/d tau0, d psi1/d tau1)``; ``f_coeffs`` does the same
    for the normalized Gram-Schmidt residuals f3, f4.  Coefficients and Gram
    matrix are held as mpmath numbers because the raw vectors are nearly
    parallel when eps is close to 1.
    """

    theta: ThetaParams
    eigenvalues: np.ndarray
    basis_coeffs: np.ndarray = field(repr=False)
    f_coeffs: np.ndarray = field(repr=False)
    gram: np.ndarray = field(repr=False)
    chi: float
    upsilon: float
    dps: int

    def _exact(self, fn):
        with mpmath.workdps(self.dps):
            return _to_float(fn())

    def basis_gram(self) -> np.ndarray:
        """``<e_i|e_j>``, evaluated through the closed-form moments."""
        c = self.basis_coeffs
        return self._exact(lambda: c @ self.gram @ c.T)

    def projections(self) -> np.ndarray:
        """``P[k, j] = <e_k | raw_j>``."""
        return self._exact(lambda: self.basis_coeffs @ self.gram)

    def rho(self) -> np.ndarray:
        p = self.projections()
        return 0.5 * (np.outer(p[:, 0], p[:, 0]) + np.outer(p[:, 1], p[:, 1]))

    def drho(self) -> dict[str, np.ndarray]:
        """Parameter derivatives of rho in the e-basis, keyed by parameter name."""
        p = self.projections()
        d_tau0 = 0.5 * (np.outer(p[:, 2], p[:, 0]) + np.outer(p[:, 0], p[:, 2]))
        d_tau1 = 0.5 * (np.outer(p[:, 3], p[:, 1]) + np.outer(p[:, 1], p[:, 3]))
        tb, eps = self.theta.tau_bar, self.theta.eps
        # chain rule through tau0 = tau_bar/eps, tau1 = eps*tau_bar
        return {
            "tau0": d_tau0,
            "tau1": d_tau1,
            "tau_bar": d_tau0 / eps + d_tau1 * eps,
            "eps": -d_tau0 * tb / eps**2 + d_tau1 * tb,
        }


def build_sld_basis(theta: ThetaParams) -> SldBasis:
    eps = theta.eps
    if eps == 1.0:
        raise DegenerateStateError("eps = 1: the two components coincide")
    if eps - 1.0 <= NEAR_DEGENERATE:
        warnings.warn(
            f"eps - 1 = {eps - 1.0:.3g}: SLD basis is ill-conditioned; "
            "prefer qfi_matrix_analytic here",
            ConditioningWarning,
            stacklevel=2,
        )
    dps = _working_dps(eps)
    with mpmath.workdps(dps):
        tb, ep = mpmath.mpf(theta.tau_bar), mpmath.mpf(eps)
        t0, t1 = tb / ep, tb * ep
        raw = [(_psi_poly(t0), t0), (_psi_poly(t1), t1), (_dpsi_poly(t0), t0), (_dpsi_poly(t1), t1)]
        gram = np.array([[_inner(pa, ta, pb, tb_) for pb, tb_ in raw] for pa, ta in raw])

        chi = gram[0, 1]
        eye = np.array([[mpmath.mpf(int(i == j)) for j in range(4)] for i in range(4)])
        e1 = (eye[0] + eye[1]) / mpmath.sqrt(2 * (1 + chi))
        e2 = (eye[0] - eye[1]) / mpmath.sqrt(2 * (1 - chi))

        def residual(v):
            v = v - (e1 @ gram @ v) * e1 - (e2 @ gram @ v) * e2
            return v / mpmath.sqrt(v @ gram @ v)

        f3, f4 = residual(eye[2]), residual(eye[3])
        upsilon = f3 @ gram @ f4
        e3 = (f3 + f4) / mpmath.sqrt(2 * (1 + upsilon))
        e4 = (f3 - f4) / mpmath.sqrt(2 * (1 - upsilon))
        d = np.array([float((1 + chi) / 2), float((1 - chi) / 2), 0.0, 0.0])
        return SldBasis(
            theta, d, np.array([e1, e2, e3, e4]), np.array([f3, f4]), gram,
            float(chi), float(upsilon), dps,
        )


def sld_matrix(basis: SldBasis, drho: np.ndarray, cutoff: float = 0.0) -> np.ndarray:
    """Matrix of the SLD in the e-basis: ``L[l, k] = 2 <e_k|drho|e_l> / (D_k + D_l)``.

    The eigenvalues come out of extended precision and the kernel ones are
    exact zeros, so the default cutoff only drops the kernel block; a fixed
    float cutoff would discard ``D_2 ~ (eps - 1)**2 / 4`` near ``eps = 1``.
    """
    d = basis.eigenvalues
    denom = d[:, None] + d[None, :]
    out = np.zeros_like(drho)
    mask = denom > cutoff
    out[mask] = 2.0 * drho[mask] / denom[mask]
    return out.T


def sld_operators(theta: ThetaParams) -> dict[str, np.ndarray]:
    basis = build_sld_basis(theta)
    drho = basis.drho()
    return {name: sld_matrix(basis, drho[name]) for name in PARAM_LABELS}


def qfi_matrix_sld(theta: ThetaParams) -> InfoMatrix:
    basis = build_sld_basis(theta)
    drho = basis.drho()
    slds = [sld_matrix(basis, drho[name]) for name in PARAM_LABELS]
    rho_diag = basis.eigenvalues
    k = np.array([[np.real(np.sum(np.diag(a @ b) * rho_diag)) for b in slds] for a in slds])
    return InfoMatrix(PARAM_LABELS, 0.5 * (k + k.T))
