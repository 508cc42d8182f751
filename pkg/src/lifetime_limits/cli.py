"""Command-line front end.

Every command writes a CSV and a sidecar ``<out>.manifest`` holding the
command, the full parameter set (as the raw strings that were parsed), the
master seed, the package version and a timestamp.  ``replay`` re-runs a
manifest; since the CSV never contains the timestamp, the output is
byte-identical to the original run.

Parameter precedence: built-in defaults < ``--config`` file < flags.

Exit codes: 0 success, 1 I/O failure, 2 usage or domain error, 3 numerical
failure.
"""
from __future__ import annotations

import argparse
import csv
import io
import math
import sys
from datetime import datetime, timezone
from importlib import metadata
from pathlib import Path

import numpy as np

from ._quad import QuadratureError
from .channels import WEAK_PATH_SCHEMES, WeakPathTask
from .chernoff import perr_curve, weak_path_chernoff
from .decay import DomainError, ThetaParams
from .fisher import cfi_eps, scheme_model, sweep
from .quantum import SingularInfoError, qfi_matrix_analytic, qfi_matrix_sld
from .simulation import SIM_SCHEMES, SimConfig, default_workers, rmse_study

EXIT_OK, EXIT_IO, EXIT_USAGE, EXIT_NUMERIC = 0, 1, 2, 3
GRID_TOL = 1e-9
CFI_SCHEMES = ("direct", "wl", "wl0", "ic", "is", "sld-check")
CHERNOFF_SCHEMES = ("quantum",) + WEAK_PATH_SCHEMES


class UsageError(Exception):
    pass


def package_version() -> str:
    try:
        return metadata.version("artifact")
    except metadata.PackageNotFoundError:
        return "0+unknown"


# ---------------------------------------------------------------- parsing

def _parse_range(piece: str) -> list[float]:
    start, stop, step = (float(p) for p in piece.split(":"))
    if step <= 0.0 or stop < start:
        raise UsageError(f"bad range {piece!r}: need start <= stop and step > 0")
    n = int(math.floor((stop - start) / step + GRID_TOL))
    # snap to 12 significant digits so 1:2:0.1 yields 1.1, not 1.1000000000000001
    return [float(f"{start + k * step:.12g}") for k in range(n + 1)]


def parse_grid(text: str) -> np.ndarray:
    """Comma list whose items are numbers or inclusive ``start:stop:step`` ranges.

    The last range point is kept when it misses ``stop`` by rounding only.
    The result is sorted and free of duplicates.
    """
    values = []
    try:
        for piece in (p.strip() for p in text.split(",")):
            if piece:
                values += _parse_range(piece) if ":" in piece else [float(piece)]
    except ValueError as exc:
        raise UsageError(f"bad grid {text!r}: {exc}") from None
    grid = np.array(values, dtype=float)
    if grid.size == 0 or not np.all(np.isfinite(grid)):
        raise UsageError(f"bad grid {text!r}")
    return np.unique(grid)


def parse_list(text: str) -> list[str]:
    return [p.strip() for p in text.split(",") if p.strip()]


def _number(kind):
    def parse(text):
        try:
            return kind(text)
        except ValueError:
            raise UsageError(f"expected {kind.__name__}, got {text!r}") from None

    return parse


def read_config(path: str) -> dict[str, str]:
    """Flat UTF-8 ``key = value`` file; ``#`` starts a comment."""
    out = {}
    for lineno, raw in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise UsageError(f"{path}:{lineno}: expected key=value")
        key, value = (s.strip() for s in line.split("=", 1))
        out[key.replace("-", "_")] = value
    return out


def fmt(value) -> str:
    if isinstance(value, str):
        return value
    if isinstance(value, (bool, np.bool_)):
        return str(int(value))
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return format(float(value), ".17g")


def label(value: float) -> str:
    """Shortest round-trip form, integers without a trailing ``.0``."""
    v = float(value)
    return str(int(v)) if v.is_integer() and abs(v) < 2**53 else repr(v)


def render_csv(header, rows) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([fmt(v) for v in row])
    return buf.getvalue()


# ---------------------------------------------------------------- commands
# Each command declares its parameters as name -> (default string, help).

PARAMS = {
    "qfi": {
        "tau_bar": ("1", "mean lifetime"),
        "eps_grid": ("1:5:0.05", "eps grid, start:stop:step or comma list"),
    },
    "cfi": {
        "scheme": ("direct", "one of " + ", ".join(CFI_SCHEMES)),
        "tau_bar": ("1", "mean lifetime"),
        "eps_grid": ("1:5:0.05", "eps grid"),
        "ic_stages": ("10", "cascaded-interferometer stages"),
        "is_R": ("0.9", "simplified-interferometer reflectivity"),
        "fd_step": ("1e-5", "relative finite-difference step"),
    },
    "chernoff": {
        "schemes": (",".join(CHERNOFF_SCHEMES), "comma list of schemes"),
        "tau_A": ("1", "lifetime under hypothesis A"),
        "tau_B": ("1.25", "weak-path lifetime under hypothesis B"),
        "p_A": ("0.9", "weight of the tau_A path under B"),
        "n_grid": ("0:10000:1000", "photon-number grid for P_err"),
        "ic_stages": ("10", "cascaded-interferometer stages"),
    },
    "mismatch": {
        "tau_bar": ("1", "mean lifetime"),
        "tau_checks": ("1,1.01,1.05,1.1", "WL reference lifetimes in units of tau_bar"),
        "eps_grid": ("1.0001,1.001,1.01:2:0.01", "eps grid"),
    },
    "simulate": {
        "schemes": (",".join(SIM_SCHEMES), "comma list of direct, wl"),
        "tau_bar": ("1", "mean lifetime"),
        "eps_grid": ("1.05,1.1,1.2,1.5,2", "eps grid"),
        "n_photons": ("10000", "photons per trial"),
        "n_trials": ("500", "trials per grid point"),
        "seed": ("20220318", "master seed"),
        "eps_max": ("20", "upper end of the MLE search interval"),
    },
}


def _eps_grid(params) -> np.ndarray:
    grid = parse_grid(params["eps_grid"])
    if grid[0] < 1.0:
        raise UsageError("eps grid values must be >= 1")
    return grid


def run_qfi(p):
    tau_bar = _number(float)(p["tau_bar"])
    table = sweep(["qfi"], _eps_grid(p), tau_bar)
    cols = ["K_tautau", "K_epseps", "qcrb_tau", "qcrb_eps"]
    rows = [[e, *(table[f"qfi.{c}"][i] for c in cols)] for i, e in enumerate(table.eps)]
    return ["eps", *cols], rows


def run_cfi(p):
    scheme = p["scheme"]
    if scheme not in CFI_SCHEMES:
        raise UsageError(f"unknown scheme {scheme!r}; choose from {', '.join(CFI_SCHEMES)}")
    tau_bar = _number(float)(p["tau_bar"])
    grid = _eps_grid(p)
    if scheme == "sld-check":
        cols = ["K_tautau_sld", "K_taueps_sld", "K_epseps_sld", "resid_tautau", "resid_taueps", "resid_epseps"]
        rows = []
        for e in grid:
            theta = ThetaParams(tau_bar, float(e))
            sld, ref = qfi_matrix_sld(theta), qfi_matrix_analytic(theta)
            keys = [("tau_bar", "tau_bar"), ("tau_bar", "eps"), ("eps", "eps")]
            vals = [sld[k] for k in keys]
            resid = [abs(sld[k] - ref[k]) / (abs(ref[k]) or 1.0) for k in keys]
            rows.append([e, *vals, *resid])
        return ["eps", *cols], rows
    settings = {"ic_stages": _number(int)(p["ic_stages"]), "is_R": _number(float)(p["is_R"]),
                "fd_step": _number(float)(p["fd_step"])}
    table = sweep([scheme], grid, tau_bar, settings)
    if scheme == "direct":
        cols = ["J_tautau", "J_taueps", "J_epseps", "crb_tau", "crb_eps"]
    else:
        cols = ["J_epseps", "crb_eps"]
    rows = [[e, *(table[f"{scheme}.{c}"][i] for c in cols)] for i, e in enumerate(table.eps)]
    return ["eps", *cols], rows


def run_chernoff(p):
    schemes = parse_list(p["schemes"])
    bad = [s for s in schemes if s not in CHERNOFF_SCHEMES]
    if bad or not schemes:
        raise UsageError(f"unknown schemes {bad}; choose from {', '.join(CHERNOFF_SCHEMES)}")
    p_a = _number(float)(p["p_A"])
    task = WeakPathTask(_number(float)(p["tau_A"]), _number(float)(p["tau_B"]), p_a, 1.0 - p_a)
    n_grid = parse_grid(p["n_grid"])
    if n_grid[0] < 0:
        raise UsageError("photon numbers must be >= 0")
    stages = _number(int)(p["ic_stages"])
    rows = []
    for s in schemes:
        res = weak_path_chernoff(s, task, stages)
        rows.append([s, res.xi, res.s_star, *perr_curve(res.xi, n_grid)])
    return ["scheme", "xi", "s_star", *(f"perr_{label(n)}" for n in n_grid)], rows


def run_mismatch(p):
    tau_bar = _number(float)(p["tau_bar"])
    checks = [_number(float)(c) for c in parse_list(p["tau_checks"])]
    if not checks:
        raise UsageError("tau_checks is empty")
    grid = _eps_grid(p)
    direct = scheme_model("direct")
    models = [scheme_model("wl_mismatch", {"tau_check": c * tau_bar}) for c in checks]
    rows = []
    for e in grid:
        theta = ThetaParams(tau_bar, float(e))
        rows.append([e, cfi_eps(direct, theta), *(cfi_eps(m, theta) for m in models)])
    return ["eps", "J_direct", *(f"J_tc_{label(c)}" for c in checks)], rows


def sim_config(p) -> SimConfig:
    return SimConfig(
        n_photons=_number(int)(p["n_photons"]),
        n_trials=_number(int)(p["n_trials"]),
        tau_bar=_number(float)(p["tau_bar"]),
        eps_grid=tuple(_eps_grid(p)),
        master_seed=_number(int)(p["seed"]),
        schemes=tuple(parse_list(p["schemes"])),
        eps_max=_number(float)(p["eps_max"]),
    )


def run_simulate(p, workers=None):
    cols = ["eps", "scheme", "rmse", "crb", "boundary_fraction", "n_photons", "n_trials", "seed"]
    rows = rmse_study(sim_config(p), workers)
    return cols, [[r[c] for c in cols] for r in rows]


RUNNERS = {"qfi": run_qfi, "cfi": run_cfi, "chernoff": run_chernoff,
           "mismatch": run_mismatch, "simulate": run_simulate}


# ---------------------------------------------------------------- manifests

def manifest_path(out: Path) -> Path:
    return out.with_name(out.name + ".manifest")


def write_manifest(out: Path, command: str, params: dict[str, str]) -> Path:
    lines = [f"command={command}"]
    lines += [f"param.{k}={params[k]}" for k in sorted(params)]
    lines += [
        f"seed={params.get('seed', 'none')}",
        f"version={package_version()}",
        f"timestamp={datetime.now(timezone.utc).isoformat(timespec='seconds')}",
    ]
    path = manifest_path(out)
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return path


def read_manifest(path: str) -> tuple[str, dict[str, str]]:
    command, params = None, {}
    for raw in Path(path).read_text(encoding="utf-8").splitlines():
        if not raw.strip():
            continue
        key, sep, value = raw.partition("=")
        if not sep:
            raise UsageError(f"malformed manifest line {raw!r}")
        if key == "command":
            command = value
        elif key.startswith("param."):
            params[key[len("param."):]] = value
    if command not in PARAMS:
        raise UsageError(f"manifest names unknown command {command!r}")
    return command, params


def execute(command: str, params: dict[str, str], out: Path, workers=None) -> None:
    unknown = set(params) - set(PARAMS[command])
    if unknown:
        raise UsageError(f"unknown parameters for {command}: {sorted(unknown)}")
    full = {k: v[0] for k, v in PARAMS[command].items()} | params
    if command == "simulate":
        header, rows = run_simulate(full, workers)
    else:
        header, rows = RUNNERS[command](full)
    text = render_csv(header, rows)
    out.parent.mkdir(parents=True, exist_ok=True)
    out.write_text(text, encoding="utf-8", newline="")
    write_manifest(out, command, full)


# ---------------------------------------------------------------- entry point

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="lifetime-limits",
        description="Information limits for fluorescence lifetime estimation and discrimination.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    helps = {
        "qfi": "quantum Fisher information and QCRB over an eps grid",
        "cfi": "classical Fisher information of one measurement scheme",
        "chernoff": "Chernoff exponents and error-probability curves for the weak-path test",
        "mismatch": "WL information with a mis-set reference lifetime",
        "simulate": "Monte Carlo MLE study (RMSE against CRB)",
    }
    for name, params in PARAMS.items():
        p = sub.add_parser(name, help=helps[name], argument_default=argparse.SUPPRESS)
        p.add_argument("--out", "-o", required=True, type=Path, help="CSV output path")
        p.add_argument("--config", help="key=value file; flags override it")
        for key, (default, text) in params.items():
            choices = CFI_SCHEMES if key == "scheme" else None
            p.add_argument(f"--{key.replace('_', '-')}", dest=key, choices=choices,
                           help=f"{text} (default {default})")
        if name == "simulate":
            p.add_argument("--workers", type=int, help="worker processes (default from LIFETIME_LIMITS_WORKERS)")
    rp = sub.add_parser("replay", help="re-run a manifest", argument_default=argparse.SUPPRESS)
    rp.add_argument("manifest")
    rp.add_argument("--out", "-o", type=Path, help="output path (default: next to the manifest)")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        ns = vars(parser.parse_args(argv))
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_USAGE
    command = ns.pop("command")
    try:
        workers = ns.pop("workers", None)
        if command == "replay":
            manifest = Path(ns["manifest"])
            command, params = read_manifest(str(manifest))
            default_out = manifest.with_name(manifest.name.removesuffix(".manifest"))
            out = ns.get("out", default_out)
        else:
            out = ns.pop("out")
            params = read_config(ns.pop("config")) if "config" in ns else {}
            params.update(ns)
        execute(command, params, out, workers if workers is not None else default_workers())
    except (UsageError, DomainError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (QuadratureError, SingularInfoError, ArithmeticError, np.linalg.LinAlgError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
