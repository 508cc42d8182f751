"""Exponential decay amplitudes, their overlaps, and weighted-Laguerre modes.

All lifetimes are in nanoseconds and times in ns.  The emitter carrier
frequency ``omega_0`` is fixed to zero: every quantity computed in this
package is the squared modulus of an overlap whose carrier phases cancel
once the interferometers are phase-trimmed, so amplitudes are taken real.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np


class DomainError(ValueError):
    """Raised when an argument lies outside the physical domain."""


def check_lifetime(tau: float, name: str = "tau") -> float:
    tau = float(tau)
    if not math.isfinite(tau) or tau <= 0.0:
        raise DomainError(f"{name} must be a positive finite lifetime, got {tau!r}")
    return tau


def _check_order(k: int, name: str = "n") -> int:
    if int(k) != k or k < 0:
        raise DomainError(f"{name} must be a nonnegative integer, got {k!r}")
    return int(k)


@dataclass(frozen=True)
class ThetaParams:
    """Geometric-mean lifetime ``tau_bar`` and square-root ratio ``eps``.

    The two component lifetimes are ``tau0 = tau_bar / eps`` and
    ``tau1 = eps * tau_bar``.
    """

    tau_bar: float
    eps: float

    def __post_init__(self):
        check_lifetime(self.tau_bar, "tau_bar")
        if not math.isfinite(self.eps) or self.eps < 1.0:
            raise DomainError(f"eps must be >= 1, got {self.eps!r}")

    @property
    def tau0(self) -> float:
        return self.tau_bar / self.eps

    @property
    def tau1(self) -> float:
        return self.eps * self.tau_bar

    @property
    def lifetimes(self) -> tuple[float, float]:
        return self.tau0, self.tau1

    @classmethod
    def from_lifetimes(cls, tau0: float, tau1: float) -> "ThetaParams":
        """Build from two lifetimes in either order (the mixture is symmetric)."""
        tau0, tau1 = sorted((check_lifetime(tau0, "tau0"), check_lifetime(tau1, "tau1")))
        return cls(math.sqrt(tau0 * tau1), math.sqrt(tau1 / tau0))


@dataclass(frozen=True)
class DecayMixture:
    """Incoherent mixture of single-exponential decays, as (weight, tau) pairs."""

    components: tuple[tuple[float, float], ...]

    def __post_init__(self):
        comps = tuple((float(w), check_lifetime(t)) for w, t in self.components)
        if not comps:
            raise DomainError("mixture needs at least one component")
        if any(w < 0.0 for w, _ in comps):
            raise DomainError("mixture weights must be nonnegative")
        if abs(math.fsum(w for w, _ in comps) - 1.0) > 1e-12:
            raise DomainError("mixture weights must sum to 1")
        object.__setattr__(self, "components", comps)

    @classmethod
    def from_theta(cls, theta: ThetaParams) -> "DecayMixture":
        return cls(((0.5, theta.tau0), (0.5, theta.tau1)))

    @property
    def max_lifetime(self) -> float:
        return max(t for _, t in self.components)

    def pdf(self, t):
        return sum(w * pdf_exponential(t, tau) for w, tau in self.components)

    def cdf(self, t):
        t = np.maximum(np.asarray(t, dtype=float), 0.0)
        return sum(w * -np.expm1(-t / tau) for w, tau in self.components)


def amplitude(t, tau: float):
    """Real one-photon amplitude ``H(t) exp(-t / 2 tau) / sqrt(tau)``."""
    tau = check_lifetime(tau)
    t = np.asarray(t, dtype=float)
    out = np.where(t >= 0.0, np.exp(-np.maximum(t, 0.0) / (2.0 * tau)), 0.0) / math.sqrt(tau)
    return out[()] if out.ndim == 0 else out


def amplitude_dtau(t, tau: float):
    """Analytic lifetime derivative of :func:`amplitude`."""
    t = np.asarray(t, dtype=float)
    return (t / (2.0 * tau**2) - 1.0 / (2.0 * tau)) * amplitude(t, tau)


def pdf_exponential(t, tau: float):
    tau = check_lifetime(tau)
    t = np.asarray(t, dtype=float)
    out = np.where(t >= 0.0, np.exp(-np.maximum(t, 0.0) / tau) / tau, 0.0)
    return out[()] if out.ndim == 0 else out


def mixture_pdf(t, theta: ThetaParams):
    """Arrival-time density of the equal-weight two-lifetime mixture."""
    return 0.5 * pdf_exponential(t, theta.tau0) + 0.5 * pdf_exponential(t, theta.tau1)


def mixture_cdf(t, theta: ThetaParams):
    return DecayMixture.from_theta(theta).cdf(t)


def overlap(tau_a: float, tau_b: float) -> float:
    tau_a, tau_b = check_lifetime(tau_a, "tau_a"), check_lifetime(tau_b, "tau_b")
    return 2.0 * math.sqrt(tau_a * tau_b) / (tau_a + tau_b)


def overlap_moment(k: int, tau_a: float, tau_b: float) -> float:
    """``int_0^inf t^k psi(t; tau_a) psi(t; tau_b) dt`` in closed form."""
    k = _check_order(k, "k")
    return moment_closed_form(k, check_lifetime(tau_a, "tau_a"), check_lifetime(tau_b, "tau_b"))


def moment_closed_form(k: int, tau_a, tau_b):
    """Unchecked closed form; works for any real number type (float, mpmath.mpf)."""
    s = tau_a + tau_b
    chi = 2 * (tau_a * tau_b) ** 0.5 / s
    mu = 2 * tau_a * tau_b / s
    return chi * math.factorial(k) * mu**k


def wl_overlap(n: int, tau_ref: float, tau: float) -> float:
    """Projection of ``psi(.; tau)`` onto the weighted-Laguerre mode ``phi_n(.; tau_ref)``.

    Evaluated as ``chi * rho**n`` with ``rho = (tau_ref - tau) / (tau_ref + tau)``,
    which stays bounded for any ``n``.
    """
    n = _check_order(n)
    tau_ref, tau = check_lifetime(tau_ref, "tau_ref"), check_lifetime(tau)
    s = tau_ref + tau
    return 2.0 * math.sqrt(tau_ref * tau) / s * ((tau_ref - tau) / s) ** n


def wl_overlap_dtau(n: int, tau_ref: float, tau: float) -> float:
    """Derivative of :func:`wl_overlap` with respect to the emitter lifetime ``tau``."""
    n = _check_order(n)
    tau_ref, tau = check_lifetime(tau_ref, "tau_ref"), check_lifetime(tau)
    s = tau_ref + tau
    chi = 2.0 * math.sqrt(tau_ref * tau) / s
    rho = (tau_ref - tau) / s
    d_chi = chi * (0.5 / tau - 1.0 / s)
    d_rho = -2.0 * tau_ref / s**2
    val = d_chi * rho**n
    if n > 0:
        val += chi * n * rho ** (n - 1) * d_rho
    return val


def laguerre(n: int, x):
    """Laguerre polynomial ``L_n(x)`` by the three-term recurrence."""
    n = _check_order(n)
    x = np.asarray(x, dtype=float)
    prev, cur = np.ones_like(x), 1.0 - x
    if n == 0:
        return prev
    for k in range(1, n):
        prev, cur = cur, ((2 * k + 1 - x) * cur - k * prev) / (k + 1)
    return cur


def wl_mode(n: int, t, tau_bar: float):
    """Time-domain weighted-Laguerre mode ``phi_n(t; tau_bar)``."""
    t = np.asarray(t, dtype=float)
    return amplitude(t, tau_bar) * laguerre(n, np.maximum(t, 0.0) / tau_bar)


def wl_zeta(omega_offset: float, tau_bar: float) -> complex:
    return omega_offset * check_lifetime(tau_bar, "tau_bar") + 0.5j


def wl_spectrum(n: int, omega_offset: float, tau_bar: float) -> complex:
    """Fourier amplitude ``(1/sqrt(2 pi)) int phi_n(t) e^{i w t} dt`` in closed form."""
    n = _check_order(n)
    zeta = wl_zeta(omega_offset, tau_bar)
    ratio = (1.0 + 1j * zeta) / (1j * zeta)
    return (1j / zeta) * math.sqrt(tau_bar / (2.0 * math.pi)) * ratio**n


def wl_phase(omega_offset: float, tau_bar: float) -> float:
    """Phase step ``Phi`` between consecutive WL spectra, in (-pi, pi].

    Quadrant-resolved form of ``arctan(-x / (x^2 - 1/4))`` with
    ``x = omega_offset * tau_bar``.
    """
    x = omega_offset * check_lifetime(tau_bar, "tau_bar")
    return math.atan2(0.0 - x, x * x - 0.25)  # 0.0 - x maps -0.0 to +0.0, keeping pi not -pi


@dataclass(frozen=True)
class WlSpectrumPoint:
    zeta: complex
    phase_Phi: float

    @classmethod
    def at(cls, omega_offset: float, tau_bar: float) -> "WlSpectrumPoint":
        return cls(wl_zeta(omega_offset, tau_bar), wl_phase(omega_offset, tau_bar))

    @property
    def phase_factor(self) -> complex:
        return complex(math.cos(self.phase_Phi), math.sin(self.phase_Phi))


def wl_truncation(ratio: float, tol: float = 1e-14, cap: int = 10_000) -> int:
    """Smallest N with ``ratio**(N+1) / (1 - ratio) < tol`` for a geometric tail."""
    if ratio <= 0.0:
        return 0
    if ratio >= 1.0:
        raise DomainError("geometric ratio must be < 1")
    n = max(0, math.ceil(math.log(tol * (1.0 - ratio)) / math.log(ratio)) - 1)
    while ratio ** (n + 1) / (1.0 - ratio) >= tol:
        n += 1
    if n > cap:
        raise DomainError(f"WL truncation N={n} exceeds cap {cap}")
    return n

