"""Classical Fisher information engines, Cramer-Rao bounds and parameter sweeps.

Analytic derivatives are used whenever a model supplies them.  Otherwise the
engines differentiate the root density ``sqrt(f)`` by finite differences and
use ``(df)^2 / f = 4 (d sqrt f)^2``; the root form stays finite on null
channels, where ``f`` and ``df`` vanish together.  Central differences are
used unless the stencil would cross ``eps = 1``, in which case a
second-order forward stencil gives the ``eps -> 1+`` limit.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ._quad import integrate_half_line
from .channels import (
    CONTINUOUS_MULTI,
    CONTINUOUS_SINGLE,
    DISCRETE,
    ChannelModel,
    direct_channel,
    ic_channel,
    is_channel,
    wl_binary_channel,
    wl_channel,
    wl_mismatched_channel,
)
from .decay import DomainError, ThetaParams
from .quantum import PARAM_LABELS, InfoMatrix, qfi_matrix_analytic

FD_STEP = 1e-5
TINY_P = 1e-300
TINY_DP = 1e-150


def _stencil(theta: ThetaParams, param: str, h: float):
    """Finite-difference nodes and weights for ``d/d param``."""
    value = getattr(theta, param)
    step = h * value
    if param == "eps" and value - step < 1.0:
        nodes, weights = (0.0, 1.0, 2.0), (-1.5, 2.0, -0.5)
    else:
        nodes, weights = (-1.0, 1.0), (-0.5, 0.5)
    thetas = []
    for k in nodes:
        kw = {"tau_bar": theta.tau_bar, "eps": theta.eps}
        kw[param] = value + k * step
        thetas.append(ThetaParams(**kw))
    return thetas, np.array(weights) / step


def _root_derivative(evaluate, theta, param, h, *args):
    thetas, weights = _stencil(theta, param, h)
    roots = [np.sqrt(np.maximum(evaluate(*args, th), 0.0)) for th in thetas]
    return sum(w * r for w, r in zip(weights, roots))


def _pair_terms(f, grads, i, j):
    """Sum over outcomes of ``g_i g_j / f`` with 0/0 -> 0."""
    gi, gj = grads[i], grads[j]
    dead = (f < TINY_P) & (np.abs(gi) < TINY_DP) & (np.abs(gj) < TINY_DP)
    safe = np.where(dead, 1.0, f)
    return float(np.sum(np.where(dead, 0.0, gi * gj / safe)))


def _continuous_info(model: ChannelModel, theta: ThetaParams, params, h: float) -> np.ndarray:
    idx = [PARAM_LABELS.index(p) for p in params]
    cache: dict[float, np.ndarray] = {}

    def terms(t):
        if t in cache:
            return cache[t]
        tt = np.array([t])
        if model.gradient is not None:
            f = model.evaluate(tt, theta)[:, 0]
            g = model.gradient(tt, theta)[idx, :, 0]
            out = np.array([[_pair_terms(f, g, a, b) for b in range(len(idx))] for a in range(len(idx))])
        else:
            r = np.array([_root_derivative(model.evaluate, theta, p, h, tt)[:, 0] for p in params])
            out = 4.0 * r @ r.T
        cache[t] = out
        return out

    n = len(params)
    info = np.zeros((n, n))
    for a in range(n):
        for b in range(a, n):
            info[a, b] = info[b, a] = integrate_half_line(
                lambda t: terms(t)[a, b], theta.lifetimes, model.breakpoints(theta)
            )
    return info


def cfi_matrix_continuous(model: ChannelModel, theta: ThetaParams, h: float = FD_STEP) -> InfoMatrix:
    """Per-photon CFI matrix over ``(tau_bar, eps)`` for a time-resolved scheme."""
    if model.kind not in (CONTINUOUS_SINGLE, CONTINUOUS_MULTI):
        raise DomainError(f"{model.name} is not a continuous model")
    return InfoMatrix(PARAM_LABELS, _continuous_info(model, theta, PARAM_LABELS, h))


def cfi_scalar_multichannel(model: ChannelModel, theta: ThetaParams, param: str = "eps",
                            h: float = FD_STEP) -> float:
    if model.kind not in (CONTINUOUS_SINGLE, CONTINUOUS_MULTI):
        raise DomainError(f"{model.name} is not a continuous model")
    return float(_continuous_info(model, theta, (param,), h)[0, 0])


def cfi_scalar_discrete(model: ChannelModel, theta: ThetaParams, param: str = "eps",
                        h: float = FD_STEP) -> float:
    """``sum_n (dP_n/d eps)^2 / P_n`` for a discrete outcome model."""
    if model.kind != DISCRETE:
        raise DomainError(f"{model.name} is not a discrete model")
    if param != "eps":
        raise DomainError("discrete engines estimate eps with tau_bar known")
    if model.root_gradient is not None:
        r = model.root_gradient(theta)
        return 4.0 * math.fsum(r * r)
    if model.gradient is not None:
        p = model.evaluate(theta)
        g = model.gradient(theta)
        return _pair_terms(p, g[None, :], 0, 0)
    r = _root_derivative(model.evaluate, theta, "eps", h)
    return 4.0 * math.fsum(r * r)


def cfi_eps(model: ChannelModel, theta: ThetaParams, h: float = FD_STEP) -> float:
    """J_eps,eps for any model (for direct time-tagging, the matrix entry)."""
    if model.kind == DISCRETE:
        return cfi_scalar_discrete(model, theta, h=h)
    return cfi_scalar_multichannel(model, theta, h=h)


def ccrb(info: InfoMatrix) -> tuple[float, ...]:
    """Square-root CRBs; a parameter with vanishing information maps to ``inf``."""
    return info.crb(allow_divergent=True)


def scalar_crb(j: float) -> float:
    return 1.0 / math.sqrt(j) if j > 0.0 else math.inf


SCHEMES = ("qfi", "direct", "wl", "wl0", "ic", "is", "wl_mismatch")


def scheme_model(scheme: str, settings: dict | None = None) -> ChannelModel:
    settings = settings or {}
    if scheme == "direct":
        return direct_channel()
    if scheme == "wl":
        return wl_channel()
    if scheme == "wl0":
        return wl_binary_channel()
    if scheme == "ic":
        return ic_channel(int(settings.get("ic_stages", 10)))
    if scheme == "is":
        return is_channel(R=float(settings.get("is_R", 0.9)))
    if scheme == "wl_mismatch":
        return wl_mismatched_channel(float(settings["tau_check"]))
    raise DomainError(f"unknown scheme {scheme!r}")


@dataclass
class SweepTable:
    """Information quantities on an increasing eps grid, one column per quantity."""

    eps: np.ndarray
    tau_bar: float
    columns: dict[str, np.ndarray] = field(default_factory=dict)
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        self.eps = np.asarray(self.eps, dtype=float)
        if self.eps.ndim != 1 or not np.all(np.diff(self.eps) > 0):
            raise DomainError("eps grid must be strictly increasing")

    def __getitem__(self, key: str) -> np.ndarray:
        return self.columns[key]


def sweep(schemes, eps_grid, tau_bar: float = 1.0, settings: dict | None = None) -> SweepTable:
    """Evaluate the requested schemes on every grid point.

    Columns are named ``<scheme>.<quantity>``: ``qfi`` gives ``K_tautau``,
    ``K_epseps``, ``qcrb_tau``, ``qcrb_eps``; ``direct`` gives the full matrix
    plus CRBs and tau_bar-scaled entries; the others give ``J_epseps`` and
    ``crb_eps`` (tau_bar known).
    """
    settings = dict(settings or {})
    table = SweepTable(eps_grid, tau_bar, metadata={"schemes": list(schemes), **settings})
    h = float(settings.get("fd_step", FD_STEP))
    for scheme in schemes:
        if scheme not in SCHEMES:
            raise DomainError(f"unknown scheme {scheme!r}")
        rows: dict[str, list[float]] = {}

        def put(name, value):
            rows.setdefault(f"{scheme}.{name}", []).append(float(value))

        model = None if scheme == "qfi" else scheme_model(scheme, settings)
        for eps in table.eps:
            theta = ThetaParams(tau_bar, float(eps))
            if scheme == "qfi":
                k = qfi_matrix_analytic(theta)
                put("K_tautau", k["tau_bar", "tau_bar"])
                put("K_epseps", k["eps", "eps"])
                for name, v in zip(("qcrb_tau", "qcrb_eps"), k.crb(allow_divergent=False)):
                    put(name, v)
            elif scheme == "direct":
                j = cfi_matrix_continuous(model, theta, h)
                put("J_tautau", j["tau_bar", "tau_bar"])
                put("J_taueps", j["tau_bar", "eps"])
                put("J_epseps", j["eps", "eps"])
                for name, v in zip(("crb_tau", "crb_eps"), ccrb(j)):
                    put(name, v)
                put("J_tautau_scaled", j["tau_bar", "tau_bar"] * tau_bar**2)
                put("J_taueps_scaled", j["tau_bar", "eps"] * tau_bar)
            else:
                j = cfi_eps(model, theta, h)
                put("J_epseps", j)
                put("crb_eps", scalar_crb(j))
        table.columns.update({k: np.array(v) for k, v in rows.items()})
    return table
