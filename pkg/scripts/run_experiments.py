#!/usr/bin/env python3
"""Run the full experiment battery and render the figures.

Drives the installed ``fluidsched`` CLI (and ``fluidsched-plot`` when
available) through its public interface: one sigma sweep, two load sweeps
(error-free and sigma = 0.5), and two d/n sweeps, all on either a SWIM
trace you provide or a generated heavy-tailed workload.

Example, desk-scale smoke (a couple of minutes):

    python scripts/run_experiments.py --outdir results --quick

Paper-scale on a real trace (hours, depending on the trace):

    python scripts/run_experiments.py --trace FB09-0.tsv --outdir results
"""

from __future__ import annotations

import argparse
import os
import shutil
import subprocess
import sys


def sh(argv: list[str]) -> None:
    print("+", " ".join(argv), flush=True)
    subprocess.run(argv, check=True)


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--trace", help="SWIM .tsv trace; default: synthetic workload")
    parser.add_argument("--outdir", default="results")
    parser.add_argument("--runs", type=int, default=100, help="runs per grid point")
    parser.add_argument("--jobs", type=int, default=os.cpu_count() or 1)
    parser.add_argument("--seed", type=int, default=42)
    parser.add_argument(
        "--quick", action="store_true",
        help="small synthetic workload and 20 runs per point",
    )
    args = parser.parse_args()

    os.makedirs(args.outdir, exist_ok=True)
    runs = 20 if args.quick else args.runs
    n_jobs = 500 if args.quick else 5000

    if args.trace:
        workload = ["--trace", args.trace]
    else:
        spec = f"pareto:n={n_jobs},rate=1,shape=1.5,scale=1,seed=37"
        workload = ["--synthetic", spec]
        sh(
            ["fluidsched", "gen-trace", "--synthetic", spec,
             "--out", os.path.join(args.outdir, "workload.tsv")]
        )

    common = workload + ["--runs", str(runs), "--jobs", str(args.jobs),
                         "--seed", str(args.seed)]
    out = lambda name: os.path.join(args.outdir, name)  # noqa: E731

    sh(["fluidsched", "sweep-sigma", *common, "--out", out("sweep_sigma.csv")])
    for sigma in ("0", "0.5"):
        tag = sigma.replace(".", "_")
        sh(["fluidsched", "sweep-load", *common, "--sigma", sigma,
            "--out", out(f"sweep_load_sigma{tag}.csv")])
        sh(["fluidsched", "sweep-dn", *common, "--sigma", sigma,
            "--out", out(f"sweep_dn_sigma{tag}.csv")])

    if shutil.which("fluidsched-plot") is None:
        print("fluidsched-plot not installed; skipping figures", file=sys.stderr)
        return 0

    sh(["fluidsched-plot", "--kind", "box-vs-sigma",
        "--csv", out("sweep_sigma.csv"), "--out", out("sojourn_vs_sigma.pdf")])
    for sigma in ("0", "0.5"):
        tag = sigma.replace(".", "_")
        sh(["fluidsched-plot", "--kind", "line-vs-load",
            "--csv", out(f"sweep_load_sigma{tag}.csv"),
            "--out", out(f"sojourn_vs_load_sigma{tag}.pdf")])
        sh(["fluidsched-plot", "--kind", "line-vs-dn",
            "--csv", out(f"sweep_dn_sigma{tag}.csv"),
            "--out", out(f"sojourn_vs_dn_sigma{tag}.pdf")])
    return 0


if __name__ == "__main__":
    sys.exit(main())
