"""Adaptive quadrature over the truncated half-line [0, 40 * tau_max]."""
from __future__ import annotations

import math
import warnings

from scipy import integrate

TAIL_FACTOR = 40.0


class QuadratureError(RuntimeError):
    """Adaptive quadrature failed to reach the requested tolerance."""


def half_line_points(lifetimes, extra=()) -> tuple[float, list[float]]:
    """Upper limit ``40 * max(tau)`` and interior breakpoints at a few lifetimes."""
    tau_max = max(lifetimes)
    upper = TAIL_FACTOR * tau_max
    pts = {float(p) for tau in lifetimes for p in (tau, 4.0 * tau, 12.0 * tau)}
    pts.update(float(p) for p in extra)
    return upper, sorted(p for p in pts if 0.0 < p < upper)


def integrate_half_line(func, lifetimes, extra_points=(), epsrel=1e-12, epsabs=0.0, limit=400):
    """Integrate ``func`` on [0, 40 * max(lifetimes)].

    Raises :class:`QuadratureError` with the estimated error when QUADPACK
    reports non-convergence.
    """
    upper, pts = half_line_points(lifetimes, extra_points)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", integrate.IntegrationWarning)
        val, err, info, *rest = integrate.quad(
            func, 0.0, upper, points=pts or None, epsrel=epsrel, epsabs=epsabs,
            limit=limit, full_output=1,
        )
    if not math.isfinite(val):
        raise QuadratureError(f"non-finite integral ({val})")
    # QUADPACK appends a message only when ier > 0; accept if the error is still small
    if rest and err > max(epsabs, 1e3 * epsrel * abs(val), 1e-300):
        raise QuadratureError(
            f"quadrature did not converge: value={val:.6g} abserr={err:.3g} "
            f"neval={info['neval']} ({rest[0]})"
        )
    return val
