"""Write every figure's data as CSV (with manifests) and optionally plot them.

    python3 scripts/reproduce_figures.py --out results [--plot] [--quick]

``--quick`` shrinks the Monte Carlo to a smoke-test size.  Plotting needs
matplotlib and is never required for the CSVs.
"""
import argparse
import csv
import sys
from pathlib import Path

from lifetime_limits.cli import main as cli

EPS = "1,1.0001,1.001,1.01:1.1:0.01,1.2:5:0.1"

RUNS = {
    "qfi.csv": ["qfi", "--eps-grid", EPS],
    "cfi_direct.csv": ["cfi", "--scheme", "direct", "--eps-grid", EPS],
    "cfi_wl.csv": ["cfi", "--scheme", "wl", "--eps-grid", EPS],
    "cfi_wl0.csv": ["cfi", "--scheme", "wl0", "--eps-grid", EPS],
    "cfi_ic.csv": ["cfi", "--scheme", "ic", "--eps-grid", EPS],
    "cfi_is.csv": ["cfi", "--scheme", "is", "--eps-grid", EPS],
    "chernoff.csv": ["chernoff", "--n-grid", "0:10000:500"],
    "mismatch.csv": ["mismatch", "--eps-grid", "1.0001,1.001,1.01:2:0.01"],
    "simulate.csv": ["simulate"],
}


def read(path):
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


def column(rows, key):
    return [float(r[key]) for r in rows]


def plot(out: Path):
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    fig, ax = plt.subplots()
    q = read(out / "qfi.csv")
    ax.plot(column(q, "eps"), column(q, "K_epseps"), "k", label="QFI")
    for name in ("direct", "wl0", "ic", "is"):
        rows = read(out / f"cfi_{name}.csv")
        ax.plot(column(rows, "eps"), column(rows, "J_epseps"), label=name)
    ax.set(xlabel="eps", ylabel="J_eps,eps (per photon)", xscale="log")
    ax.legend()
    fig.savefig(out / "information.png", dpi=150)

    fig, ax = plt.subplots()
    for row in read(out / "chernoff.csv"):
        ns = [float(k.removeprefix("perr_")) for k in row if k.startswith("perr_")]
        ax.semilogy(ns, [float(v) for k, v in row.items() if k.startswith("perr_")], label=row["scheme"])
    ax.set(xlabel="N photons", ylabel="P_err")
    ax.legend()
    fig.savefig(out / "chernoff.png", dpi=150)

    fig, ax = plt.subplots()
    m = read(out / "mismatch.csv")
    for key in m[0]:
        if key.startswith("J_"):
            ax.plot(column(m, "eps"), column(m, key), label=key)
    ax.set(xlabel="eps", ylabel="J_eps,eps", xscale="log", yscale="log")
    ax.legend()
    fig.savefig(out / "mismatch.png", dpi=150)

    fig, ax = plt.subplots()
    s = read(out / "simulate.csv")
    for scheme in ("direct", "wl"):
        rows = [r for r in s if r["scheme"] == scheme]
        ax.plot(column(rows, "eps"), column(rows, "rmse"), "o", label=f"{scheme} RMSE")
        ax.plot(column(rows, "eps"), column(rows, "crb"), "-", label=f"{scheme} CRB")
    ax.set(xlabel="eps", ylabel="error on eps", yscale="log")
    ax.legend()
    fig.savefig(out / "simulate.png", dpi=150)


def run(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out", type=Path, default=Path("results"))
    ap.add_argument("--plot", action="store_true")
    ap.add_argument("--quick", action="store_true", help="small Monte Carlo")
    args = ap.parse_args(argv)
    args.out.mkdir(parents=True, exist_ok=True)
    for name, cmd in RUNS.items():
        extra = ["--n-trials", "50", "--n-photons", "2000"] if args.quick and cmd[0] == "simulate" else []
        code = cli([*cmd, *extra, "--out", str(args.out / name)])
        print(f"{name}: exit {code}")
        if code:
            return code
    if args.plot:
        plot(args.out)
    return 0


if __name__ == "__main__":
    sys.exit(run())
