"""Classical and quantum Chernoff exponents for symmetric binary tests."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import optimize

from ._quad import integrate_half_line
from .channels import DISCRETE, OutcomeDistribution, WeakPathTask, weak_path_channels
from .decay import DomainError, overlap

S_TOL = 1e-10


@dataclass(frozen=True)
class ChernoffResult:
    xi: float
    s_star: float
    scheme: str = ""

    def __post_init__(self):
        if not self.xi >= 0.0:
            raise ValueError(f"Chernoff exponent must be >= 0, got {self.xi}")
        if not 0.0 <= self.s_star <= 1.0:
            raise ValueError(f"s_star must lie in [0, 1], got {self.s_star}")


def _powmix(a, b, s):
    """``a**s * b**(1-s)`` for 0 < s < 1, exact zero where either factor is zero."""
    both = (a > 0.0) & (b > 0.0)
    la = np.log(np.where(both, a, 1.0))
    lb = np.log(np.where(both, b, 1.0))
    return np.where(both, np.exp(s * la + (1.0 - s) * lb), 0.0)


def _check_pair(dist_a: OutcomeDistribution, dist_b: OutcomeDistribution):
    if dist_a.kind != dist_b.kind or len(dist_a.labels) != len(dist_b.labels):
        raise DomainError("distributions must share the same outcome structure")


def _channel_integral(dist_a, dist_b, integrand):
    lifetimes = tuple(dist_a.lifetimes) + tuple(dist_b.lifetimes)
    points = tuple(dist_a.breakpoints) + tuple(dist_b.breakpoints)

    def one(c):
        def g(t):
            tt = np.array([t])
            return float(integrand(dist_a.density(tt)[c], dist_b.density(tt)[c])[0])

        return integrate_half_line(g, lifetimes, points)

    return math.fsum(one(c) for c in range(len(dist_a.labels)))


def chernoff_coefficient(dist_a, dist_b, s: float) -> float:
    """``sum / integral of f_A^s f_B^(1-s)`` for ``0 < s < 1``."""
    _check_pair(dist_a, dist_b)
    if dist_a.kind == DISCRETE:
        return math.fsum(_powmix(dist_a.pmf, dist_b.pmf, s))
    return _channel_integral(dist_a, dist_b, lambda fa, fb: _powmix(fa, fb, s))


def _endpoint_limits(dist_a, dist_b) -> tuple[float, float]:
    """Limits of the coefficient as ``s -> 0+`` and ``s -> 1-``."""
    if dist_a.kind == DISCRETE:
        pa, pb = dist_a.pmf, dist_b.pmf
        return math.fsum(pb[pa > 0.0]), math.fsum(pa[pb > 0.0])
    lo = _channel_integral(dist_a, dist_b, lambda fa, fb: np.where(fa > 0.0, fb, 0.0))
    hi = _channel_integral(dist_a, dist_b, lambda fa, fb: np.where(fb > 0.0, fa, 0.0))
    return lo, hi


def classical_chernoff(dist_a, dist_b, scheme: str = "") -> ChernoffResult:
    """``xi = -log min_s C(s)`` with the endpoint limits compared explicitly.

    The interior minimum comes from bounded Brent search (golden section with
    parabolic steps) to ``|ds| < 1e-10``.
    """
    _check_pair(dist_a, dist_b)
    res = optimize.minimize_scalar(
        lambda s: chernoff_coefficient(dist_a, dist_b, s),
        bounds=(0.0, 1.0), method="bounded", options={"xatol": S_TOL},
    )
    candidates = [(float(res.fun), float(res.x))]
    lo, hi = _endpoint_limits(dist_a, dist_b)
    candidates += [(lo, 0.0), (hi, 1.0)]
    c_min, s_star = min(candidates)
    if c_min <= 0.0:
        return ChernoffResult(math.inf, s_star, scheme)
    return ChernoffResult(max(0.0, -math.log(c_min)), s_star, scheme)


def chernoff_profile(dist_a, dist_b, s_grid) -> np.ndarray:
    return np.array([chernoff_coefficient(dist_a, dist_b, float(s)) for s in s_grid])


def quantum_chernoff_pure(task: WeakPathTask = WeakPathTask()) -> ChernoffResult:
    """Quantum exponent when state A is pure: ``-log <psi_A|rho_B|psi_A>``."""
    fidelity = task.p_A + task.p_B * overlap(task.tau_A, task.tau_B) ** 2
    return ChernoffResult(max(0.0, -math.log(fidelity)), 0.0, "quantum")


def weak_path_chernoff(scheme: str, task: WeakPathTask = WeakPathTask(), ic_stages: int = 10) -> ChernoffResult:
    if scheme == "quantum":
        return quantum_chernoff_pure(task)
    dist_a, dist_b = weak_path_channels(scheme, task, ic_stages)
    return classical_chernoff(dist_a, dist_b, scheme)


def perr_curve(xi: float, n_photons) -> np.ndarray:
    """Asymptotic error probability ``exp(-xi N) / 2``."""
    if xi < 0.0:
        raise DomainError("xi must be nonnegative")
    return 0.5 * np.exp(-xi * np.asarray(n_photons, dtype=float))
