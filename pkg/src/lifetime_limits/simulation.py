"""Seeded Monte Carlo of the bi-exponential resolution task with MLE of eps.

Seeding rule: the generator for trial ``k`` of grid point ``i`` under scheme
index ``j`` (``direct`` = 0, ``wl`` = 1) is
``numpy.random.default_rng(SeedSequence(master_seed, spawn_key=(i, k, j)))``.
Each trial therefore owns an independent stream and results do not depend on
execution order or on the number of worker processes.
"""
from __future__ import annotations

import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass

import numpy as np
from scipy import optimize

from .channels import direct_channel, wl_modes, wl_ratio
from .decay import DomainError, ThetaParams, check_lifetime
from .fisher import cfi_eps

SIM_SCHEMES = ("direct", "wl")
EPS_MAX = 20.0
MLE_STARTS = (1.01, 2.0, 10.0)
WORKERS_ENV = "LIFETIME_LIMITS_WORKERS"


@dataclass(frozen=True)
class SimConfig:
    n_photons: int = 10_000
    n_trials: int = 500
    tau_bar: float = 1.0
    eps_grid: tuple[float, ...] = (1.05, 1.1, 1.2, 1.5, 2.0)
    master_seed: int = 20220318
    schemes: tuple[str, ...] = SIM_SCHEMES
    eps_max: float = EPS_MAX

    def __post_init__(self):
        if self.n_photons < 1 or self.n_trials < 1:
            raise DomainError("n_photons and n_trials must be positive")
        check_lifetime(self.tau_bar, "tau_bar")
        object.__setattr__(self, "eps_grid", tuple(float(e) for e in self.eps_grid))
        object.__setattr__(self, "schemes", tuple(self.schemes))
        if any(e < 1.0 for e in self.eps_grid):
            raise DomainError("eps grid values must be >= 1")
        unknown = set(self.schemes) - set(SIM_SCHEMES)
        if unknown:
            raise DomainError(f"unknown simulation schemes {sorted(unknown)}")
        if not 0 <= self.master_seed < 2**64:
            raise DomainError("master_seed must be a 64-bit unsigned integer")


@dataclass(frozen=True)
class TrialResult:
    eps_hat: float
    converged: bool
    loglik: float
    boundary: bool = False
    multimodal: bool = False


def trial_rng(master_seed: int, eps_index: int, trial_index: int, scheme_index: int) -> np.random.Generator:
    ss = np.random.SeedSequence(master_seed, spawn_key=(eps_index, trial_index, scheme_index))
    return np.random.default_rng(ss)


def sample_direct(theta: ThetaParams, n: int, seed) -> np.ndarray:
    """Arrival times: fair coin for the component, then inverse-CDF exponential."""
    if n < 1:
        raise DomainError("need at least one photon")
    rng = np.random.default_rng(seed)
    pick = rng.random(n) < 0.5
    u = rng.random(n)
    tau = np.where(pick, theta.tau0, theta.tau1)
    return -tau * np.log1p(-u)


def sample_wl(theta: ThetaParams, n: int, seed, n_max: int | None = None) -> np.ndarray:
    """Mode counts for modes ``0..n_max`` plus a final overflow bin."""
    if n < 1:
        raise DomainError("need at least one photon")
    if n_max is None:
        n_max = int(wl_modes(theta)[-1])
    r = wl_ratio(theta.eps)
    modes = np.arange(n_max + 1)
    probs = np.append((1.0 - r) * r**modes, r ** (n_max + 1))
    rng = np.random.default_rng(seed)
    return rng.multinomial(n, probs / probs.sum())


def _maximize(loglik, lo: float, hi: float, starts=MLE_STARTS) -> TrialResult:
    grid = np.unique(np.concatenate([np.geomspace(lo, hi, 32), [s for s in starts if lo <= s <= hi]]))
    vals = np.array([loglik(x) for x in grid])
    vals = np.where(np.isfinite(vals), vals, -np.inf)
    if not np.isfinite(vals).any():
        return TrialResult(float("nan"), False, float("-inf"))
    # count separate local maxima of the coarse profile
    padded = np.concatenate([[-np.inf], vals, [-np.inf]])
    peaks = np.flatnonzero((vals > padded[:-2]) & (vals >= padded[2:]))
    multimodal = len(peaks) > 1 and np.ptp(vals[peaks]) > 1e-9 * max(1.0, abs(vals.max()))

    i = int(np.argmax(vals))
    a, b = grid[max(i - 1, 0)], grid[min(i + 1, len(grid) - 1)]
    res = optimize.minimize_scalar(lambda x: -loglik(x), bounds=(a, b), method="bounded",
                                   options={"xatol": 1e-8})
    x, f = float(res.x), float(-res.fun)
    # Brent never lands exactly on the bracket ends
    for edge in (a, b):
        if vals[np.searchsorted(grid, edge)] > f:
            x, f = float(edge), float(vals[np.searchsorted(grid, edge)])
    boundary = x - lo <= 1e-6 or hi - x <= 1e-6
    return TrialResult(x, bool(res.success) and math.isfinite(f), f, boundary, bool(multimodal))


def direct_loglik(times: np.ndarray, tau_bar: float, eps: float) -> float:
    t0, t1 = tau_bar / eps, tau_bar * eps
    return float(np.sum(np.logaddexp(-times / t0 - math.log(t0), -times / t1 - math.log(t1))) - len(times) * math.log(2.0))


def mle_eps_direct(times, tau_bar_known: float, eps_max: float = EPS_MAX) -> TrialResult:
    times = np.asarray(times, dtype=float)
    if times.size == 0:
        raise DomainError("cannot estimate from an empty sample")
    return _maximize(lambda e: direct_loglik(times, tau_bar_known, e), 1.0, eps_max)


def wl_loglik(counts: np.ndarray, eps: float) -> float:
    """Multinomial log-likelihood; the last bin is the overflow ``n > N``.

    With ``P_n = (1 - r) r**n`` this is ``A log(1 - r) + B log r``.
    """
    counts = np.asarray(counts, dtype=float)
    n_max = len(counts) - 2
    a = counts[:-1].sum()
    b = float(np.arange(n_max + 1) @ counts[:-1]) + (n_max + 1) * counts[-1]
    r = wl_ratio(eps)
    ll = a * math.log1p(-r)
    if b > 0.0:
        ll += b * math.log(r) if r > 0.0 else -math.inf
    return ll


def mle_eps_wl(counts, eps_max: float = EPS_MAX) -> TrialResult:
    counts = np.asarray(counts)
    if counts.ndim != 1 or counts.size < 2 or counts.sum() == 0:
        raise DomainError("need WL counts for at least one mode plus the overflow bin")
    return _maximize(lambda e: wl_loglik(counts, e), 1.0, eps_max)


def crb_per_photon(scheme: str, theta: ThetaParams) -> float:
    """Per-photon CRB on eps with tau_bar known."""
    if scheme == "wl":
        return theta.eps
    j = cfi_eps(direct_channel(), theta)
    return 1.0 / math.sqrt(j) if j > 0.0 else math.inf


def _run_point(args) -> dict:
    config, scheme, eps_index = args
    eps = config.eps_grid[eps_index]
    theta = ThetaParams(config.tau_bar, eps)
    scheme_index = SIM_SCHEMES.index(scheme)
    sq_err, hits = [], 0
    for k in range(config.n_trials):
        rng = trial_rng(config.master_seed, eps_index, k, scheme_index)
        if scheme == "direct":
            res = mle_eps_direct(sample_direct(theta, config.n_photons, rng), config.tau_bar, config.eps_max)
        else:
            res = mle_eps_wl(sample_wl(theta, config.n_photons, rng), config.eps_max)
        sq_err.append((res.eps_hat - eps) ** 2)
        hits += res.boundary
    return {
        "eps": eps,
        "scheme": scheme,
        "rmse": math.sqrt(math.fsum(sq_err) / config.n_trials),
        "crb": crb_per_photon(scheme, theta) / math.sqrt(config.n_photons),
        "boundary_fraction": hits / config.n_trials,
        "n_photons": config.n_photons,
        "n_trials": config.n_trials,
        "seed": config.master_seed,
    }


def default_workers() -> int:
    return max(1, int(os.environ.get(WORKERS_ENV, "1")))


def rmse_study(config: SimConfig, workers: int | None = None) -> list[dict]:
    """RMSE of the eps MLE per grid point and scheme, next to ``CRB / sqrt(n_photons)``.

    Rows are ordered by grid point, then scheme, whatever the worker count.
    """
    jobs = [(config, s, i) for i in range(len(config.eps_grid)) for s in config.schemes]
    workers = default_workers() if workers is None else workers
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(_run_point, jobs))
    return [_run_point(job) for job in jobs]


def config_dict(config: SimConfig) -> dict:
    return asdict(config)
