"""Outcome distributions for each measurement scheme.

Schemes: direct time-tagging, weighted-Laguerre (WL) mode sorting (full,
binary, and with a mismatched reference lifetime), the cascaded
interferometer ``iC`` and the simplified interferometer ``iS``.  Interferometer
phases are assumed trimmed so that interfering amplitudes are real and the
null port is the difference combination.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .decay import (
    DomainError,
    ThetaParams,
    check_lifetime,
    mixture_pdf,
    overlap,
    pdf_exponential,
    wl_overlap,
    wl_overlap_dtau,
    wl_truncation,
)

CONTINUOUS_SINGLE = "continuous-single"
DISCRETE = "discrete"
CONTINUOUS_MULTI = "continuous-multichannel"

LN2 = math.log(2.0)
WL_TAIL_TOL = 1e-14


@dataclass(frozen=True)
class ChannelModel:
    """A measurement scheme's outcome law, parameterized by ``ThetaParams``.

    Discrete models map ``theta -> pmf``.  Continuous models map
    ``(t, theta) -> densities`` of shape ``(n_channels, len(t))``.  The
    optional callables give analytic derivatives; the Fisher engines fall back
    to finite differences without them.
    """

    name: str
    kind: str
    evaluate: Callable
    labels: tuple[str, ...] | None = None
    # discrete: theta -> dP/d eps.  continuous: (t, theta) -> (2, n_channels, len(t)) over (tau_bar, eps)
    gradient: Callable | None = None
    # discrete only: theta -> d sqrt(P)/d eps, finite where P vanishes
    root_gradient: Callable | None = None
    breakpoints: Callable[[ThetaParams], tuple[float, ...]] = field(default=lambda theta: ())

    def channel_labels(self, n: int) -> tuple[str, ...]:
        return self.labels if self.labels is not None else tuple(f"n={k}" for k in range(n))

    def total_probability(self, theta: ThetaParams) -> float:
        if self.kind == DISCRETE:
            return math.fsum(self.evaluate(theta))
        from ._quad import integrate_half_line

        n_ch = self.evaluate(np.array([0.0]), theta).shape[0]
        return math.fsum(
            integrate_half_line(
                lambda t, c=c: float(self.evaluate(np.array([t]), theta)[c, 0]),
                theta.lifetimes,
                self.breakpoints(theta),
            )
            for c in range(n_ch)
        )


# --- direct time-tagging ---------------------------------------------------

def _direct_density(t, theta):
    return np.atleast_2d(mixture_pdf(t, theta))


def _direct_gradient(t, theta):
    t = np.asarray(t, dtype=float)
    d_tau = []
    for tau in theta.lifetimes:
        f = pdf_exponential(t, tau)
        d_tau.append(0.5 * f * (t / tau**2 - 1.0 / tau))
    eps, tb = theta.eps, theta.tau_bar
    d_tb = d_tau[0] / eps + d_tau[1] * eps
    d_eps = -d_tau[0] * tb / eps**2 + d_tau[1] * tb
    return np.array([[d_tb], [d_eps]])


def direct_channel() -> ChannelModel:
    return ChannelModel(
        "direct", CONTINUOUS_SINGLE, _direct_density, labels=("t",), gradient=_direct_gradient
    )


# --- weighted-Laguerre mode sorting ----------------------------------------

def wl_ratio(eps: float) -> float:
    """Geometric ratio ``P_{n+1} / P_n = ((eps - 1) / (eps + 1))**2``."""
    return ((eps - 1.0) / (eps + 1.0)) ** 2


def wl_pmf(n: int, theta: ThetaParams) -> float:
    if int(n) != n or n < 0:
        raise DomainError(f"mode index must be a nonnegative integer, got {n!r}")
    e = theta.eps
    return 4.0 * e * (e * e - 1.0) ** (2 * n) / (e + 1.0) ** (4 * n + 2)


def wl_modes(theta: ThetaParams) -> np.ndarray:
    """Mode indices 0..N kept by the geometric tail policy.

    Mode 1 is always kept: it carries all the information as eps -> 1.
    """
    return np.arange(max(1, wl_truncation(wl_ratio(theta.eps), WL_TAIL_TOL)) + 1)


def _wl_pmf_all(theta):
    n = wl_modes(theta)
    e = theta.eps
    return 4.0 * e / (e + 1.0) ** 2 * wl_ratio(e) ** n


def _wl_root_gradient(theta):
    # sqrt(P_n) = 2 sqrt(eps) (eps-1)^n / (eps+1)^(n+1)
    n = wl_modes(theta)
    e = theta.eps
    a = (e - 1.0) ** n
    a_prev = np.where(n > 0, (e - 1.0) ** np.maximum(n - 1, 0), 0.0)
    s = e + 1.0
    return 2.0 * (
        0.5 / math.sqrt(e) * a / s ** (n + 1)
        + math.sqrt(e) * n * a_prev / s ** (n + 1)
        - math.sqrt(e) * (n + 1) * a / s ** (n + 2)
    )


def _wl_gradient(theta):
    return 2.0 * np.sqrt(_wl_pmf_all(theta)) * _wl_root_gradient(theta)


def wl_channel() -> ChannelModel:
    """Full WL sorter referenced to the true ``tau_bar``, truncated at tail < 1e-14."""
    return ChannelModel(
        "wl", DISCRETE, _wl_pmf_all, gradient=_wl_gradient, root_gradient=_wl_root_gradient
    )


def wl_binary_pmf(theta: ThetaParams) -> np.ndarray:
    p0 = 4.0 * theta.eps / (theta.eps + 1.0) ** 2
    return np.array([p0, wl_ratio(theta.eps)])


def _wl_binary_root_gradient(theta):
    e = theta.eps
    return np.array([(1.0 - e) / (math.sqrt(e) * (e + 1.0) ** 2), 2.0 / (e + 1.0) ** 2])


def _wl_binary_gradient(theta):
    return 2.0 * np.sqrt(wl_binary_pmf(theta)) * _wl_binary_root_gradient(theta)


def wl_binary_channel() -> ChannelModel:
    return ChannelModel(
        "wl0", DISCRETE, wl_binary_pmf, labels=("phi0", "rest"),
        gradient=_wl_binary_gradient, root_gradient=_wl_binary_root_gradient,
    )


def wl_pmf_mismatched(n: int, theta: ThetaParams, tau_check: float) -> float:
    return 0.5 * wl_overlap(n, tau_check, theta.tau0) ** 2 + 0.5 * wl_overlap(n, tau_check, theta.tau1) ** 2


def _mismatch_modes(theta, tau_check):
    ratio = max(((tau_check - tau) / (tau_check + tau)) ** 2 for tau in theta.lifetimes)
    return range(max(1, wl_truncation(ratio, WL_TAIL_TOL)) + 1)


def wl_mismatched_channel(tau_check: float) -> ChannelModel:
    """WL sorter referenced to a fixed (possibly wrong) lifetime ``tau_check``."""
    tau_check = check_lifetime(tau_check, "tau_check")

    def pmf(theta):
        return np.array([wl_pmf_mismatched(n, theta, tau_check) for n in _mismatch_modes(theta, tau_check)])

    def grad(theta):
        tb, e = theta.tau_bar, theta.eps
        dtau = (-tb / e**2, tb)
        return np.array([
            sum(
                wl_overlap(n, tau_check, tau) * wl_overlap_dtau(n, tau_check, tau) * dt
                for tau, dt in zip(theta.lifetimes, dtau)
            )
            for n in _mismatch_modes(theta, tau_check)
        ])

    return ChannelModel(f"wl_mismatch[{tau_check:g}]", DISCRETE, pmf, gradient=grad)


# --- cascaded interferometer iC --------------------------------------------

@dataclass(frozen=True)
class IcModel:
    """Cascade of ``stages`` temporal beam splitters spaced by ``tau_ref * ln 2``."""

    stages: int = 10
    tau_ref: float = 1.0

    def __post_init__(self):
        if int(self.stages) != self.stages or self.stages < 1:
            raise DomainError(f"iC needs at least one stage, got {self.stages!r}")
        check_lifetime(self.tau_ref, "tau_ref")

    @property
    def tau_half(self) -> float:
        return self.tau_ref * LN2

    def q(self, tau: float) -> float:
        """Fraction of a slice's successor mass, ``exp(-tau_half / tau)``."""
        return math.exp(-LN2 * self.tau_ref / check_lifetime(tau))

    def beta(self, tau: float) -> float:
        """Reference-arm amplitude ratio ``exp(tau_half / 2 tau) / sqrt(2)``."""
        return math.exp(0.5 * LN2 * (self.tau_ref / check_lifetime(tau) - 1.0))

    @property
    def labels(self) -> tuple[str, ...]:
        m = range(1, self.stages + 1)
        return (*(f"a{k}" for k in m), *(f"b{k}" for k in m), "residual_top", "residual_ref")


def ic_channel_probs(tau: float, model: IcModel) -> np.ndarray:
    """Detection probabilities ``(a_1..a_M, b_1..b_M, residual_top, residual_ref)``."""
    x = model.tau_ref / check_lifetime(tau)
    m = np.arange(1, model.stages + 1)
    one_minus_q = -math.expm1(-LN2 * x)
    # amplitudes carry sqrt(slice mass): 2^(-x m/2) -/+ 2^(-m/2), never overflowing
    top_amp = np.exp(-0.5 * LN2 * x * m)
    ref_amp = np.exp(-0.5 * LN2 * m)
    # difference via expm1 of the smaller-magnitude exponent, so the nulls at tau = tau_ref are exact
    k = 0.5 * LN2 * m * (x - 1.0)
    amp_a = top_amp * np.expm1(k) if x <= 1.0 else ref_amp * np.expm1(-k)
    amp_b = top_amp + ref_amp
    p_a = 0.5 * amp_a**2 * one_minus_q
    p_b = 0.5 * amp_b**2 * one_minus_q
    top = math.exp(-LN2 * x * (model.stages + 1))
    ref = one_minus_q * 2.0 ** (-model.stages)
    return np.concatenate([p_a, p_b, [top, ref]])


def ic_mixture_probs(theta: ThetaParams, model: IcModel) -> np.ndarray:
    return 0.5 * ic_channel_probs(theta.tau0, model) + 0.5 * ic_channel_probs(theta.tau1, model)


def ic_channel(stages: int = 10, tau_ref: float | None = None) -> ChannelModel:
    """iC scheme; ``tau_ref=None`` tunes the delays to the true ``tau_bar``."""

    def pmf(theta):
        return ic_mixture_probs(theta, IcModel(stages, tau_ref or theta.tau_bar))

    return ChannelModel("ic", DISCRETE, pmf, labels=IcModel(stages).labels)


# --- simplified interferometer iS ------------------------------------------

@dataclass(frozen=True)
class IsModel:
    """Unbalanced splitter (reflectance R) plus a delay on the transmitted arm."""

    tau_ref: float = 1.0
    R: float = 0.9

    def __post_init__(self):
        check_lifetime(self.tau_ref, "tau_ref")
        if not 0.5 < self.R < 1.0:
            raise DomainError("iS needs 0.5 < R < 1 so that the delay is positive")

    @property
    def T(self) -> float:
        return 1.0 - self.R

    @property
    def delta_t(self) -> float:
        return self.tau_ref * math.log(self.R / self.T)


IS_CHANNELS = ("minus", "plus")


def is_channel_density(t, channel: str, tau: float, model: IsModel):
    """Time-resolved density at the ``minus`` (null) or ``plus`` output port."""
    if channel not in IS_CHANNELS:
        raise DomainError(f"unknown iS channel {channel!r}")
    tau = check_lifetime(tau)
    t = np.asarray(t, dtype=float)
    f = pdf_exponential(t, tau)
    # sqrt(T) exp(dt / 2 tau) = sqrt(R) exp(c) with c = 0 at tau = tau_ref
    c = 0.5 * model.delta_t * (1.0 / tau - 1.0 / model.tau_ref)
    factor = -math.expm1(c) if channel == "minus" else 1.0 + math.exp(c)
    late = 0.5 * model.R * f * factor**2
    return np.where(t >= model.delta_t, late, 0.5 * model.R * f)


def _is_densities(t, tau, model):
    return np.array([is_channel_density(t, ch, tau, model) for ch in IS_CHANNELS])


def is_channel(tau_ref: float | None = None, R: float = 0.9) -> ChannelModel:
    """iS scheme; ``tau_ref=None`` tunes the delay to the true ``tau_bar``."""

    def model(theta):
        return IsModel(tau_ref or theta.tau_bar, R)

    def density(t, theta):
        m = model(theta)
        return 0.5 * _is_densities(t, theta.tau0, m) + 0.5 * _is_densities(t, theta.tau1, m)

    return ChannelModel(
        "is", CONTINUOUS_MULTI, density, labels=IS_CHANNELS,
        breakpoints=lambda theta: (model(theta).delta_t,),
    )


# --- weak-decay-path discrimination ----------------------------------------

@dataclass(frozen=True)
class WeakPathTask:
    """State A: pure decay at ``tau_A``.  State B: A mixed with a weak ``tau_B`` path."""

    tau_A: float = 1.0
    tau_B: float = 1.25
    p_A: float = 0.9
    p_B: float = 0.1

    def __post_init__(self):
        check_lifetime(self.tau_A, "tau_A")
        check_lifetime(self.tau_B, "tau_B")
        if min(self.p_A, self.p_B) < 0.0 or abs(self.p_A + self.p_B - 1.0) > 1e-12:
            raise DomainError("p_A and p_B must be nonnegative and sum to 1")


@dataclass(frozen=True)
class OutcomeDistribution:
    """A fixed (parameter-free) outcome law used for hypothesis testing."""

    kind: str
    labels: tuple[str, ...]
    pmf: np.ndarray | None = None
    density: Callable | None = None
    lifetimes: tuple[float, ...] = ()
    breakpoints: tuple[float, ...] = ()

    def total(self) -> float:
        if self.kind == DISCRETE:
            return math.fsum(self.pmf)
        from ._quad import integrate_half_line

        return math.fsum(
            integrate_half_line(lambda t, c=c: float(self.density(np.array([t]))[c, 0]),
                                self.lifetimes, self.breakpoints)
            for c in range(len(self.labels))
        )


WEAK_PATH_SCHEMES = ("direct", "ic", "is", "optimal", "wl")


def weak_path_channels(scheme: str, task: WeakPathTask = WeakPathTask(), ic_stages: int = 10):
    """Outcome distributions ``(dist_A, dist_B)`` for the weak-decay-path test.

    Interferometers and the WL sorter are referenced to ``tau_A``.
    """
    ta, tb, pa, pb = task.tau_A, task.tau_B, task.p_A, task.p_B
    lifetimes = (ta, tb)
    if scheme == "direct":
        def dens_a(t):
            return np.atleast_2d(pdf_exponential(t, ta))

        def dens_b(t):
            return np.atleast_2d(pa * pdf_exponential(t, ta) + pb * pdf_exponential(t, tb))

        return tuple(
            OutcomeDistribution(CONTINUOUS_SINGLE, ("t",), density=d, lifetimes=lifetimes)
            for d in (dens_a, dens_b)
        )
    if scheme == "is":
        m = IsModel(ta)

        def dens_a(t):
            return _is_densities(t, ta, m)

        def dens_b(t):
            return pa * _is_densities(t, ta, m) + pb * _is_densities(t, tb, m)

        return tuple(
            OutcomeDistribution(CONTINUOUS_MULTI, IS_CHANNELS, density=d,
                                lifetimes=lifetimes, breakpoints=(m.delta_t,))
            for d in (dens_a, dens_b)
        )
    if scheme == "ic":
        m = IcModel(ic_stages, ta)
        p_a = ic_channel_probs(ta, m)
        p_b = pa * p_a + pb * ic_channel_probs(tb, m)
        return OutcomeDistribution(DISCRETE, m.labels, pmf=p_a), OutcomeDistribution(DISCRETE, m.labels, pmf=p_b)
    if scheme == "optimal":
        stay = pa + pb * overlap(ta, tb) ** 2
        labels = ("psi_A", "complement")
        return (
            OutcomeDistribution(DISCRETE, labels, pmf=np.array([1.0, 0.0])),
            OutcomeDistribution(DISCRETE, labels, pmf=np.array([stay, 1.0 - stay])),
        )
    if scheme == "wl":
        n_max = wl_truncation(((ta - tb) / (ta + tb)) ** 2, WL_TAIL_TOL)
        w = np.array([wl_overlap(n, ta, tb) for n in range(n_max + 1)])
        p_a = np.zeros(n_max + 1)
        p_a[0] = 1.0
        p_b = pb * w**2
        p_b[0] += pa
        labels = tuple(f"n={n}" for n in range(n_max + 1))
        return OutcomeDistribution(DISCRETE, labels, pmf=p_a), OutcomeDistribution(DISCRETE, labels, pmf=p_b)
    raise DomainError(f"unknown weak-path scheme {scheme!r}; expected one of {WEAK_PATH_SCHEMES}")
