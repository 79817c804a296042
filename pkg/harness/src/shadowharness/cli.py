"""Harness command line: run a canned sweep, plot it, or replay a manifest."""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from . import sweeps
from .plots import plot_results
from .runner import replay_manifest, run_sweep

CANNED = {
    "fidelity-vs-n": (sweeps.fidelity_vs_n, "GHZ self-fidelity vs system size", "fidelity"),
    "fidelity-vs-noise": (sweeps.fidelity_vs_noise, "GHZ fidelity vs phase-error rate", "fidelity"),
    "entropy-vs-budget": (sweeps.entropy_vs_budget, "half-chain entropy vs shot budget", "entropy (bits)"),
    "derandomized-vs-random": (
        sweeps.derandomized_vs_random, "rows needed to reach the hit target", "measurement rows",
    ),
}


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="shadow-harness", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run a canned sweep and plot it")
    run.add_argument("sweep", choices=sorted(CANNED))
    run.add_argument("--workdir", required=True)
    run.add_argument("--seeds", type=int, default=5)
    run.add_argument("--workers", type=int, default=2)
    run.add_argument("--no-plot", action="store_true")

    plot = sub.add_parser("plot", help="plot an existing results csv")
    plot.add_argument("--results", required=True)
    plot.add_argument("--out", required=True)
    plot.add_argument("--title", default="")
    plot.add_argument("--ylabel", default="")

    rep = sub.add_parser("replay", help="re-run a manifest and verify artifacts")
    rep.add_argument("--workdir", required=True)
    rep.add_argument("--fresh", required=True)

    args = parser.parse_args(argv)
    if args.command == "run":
        factory, title, ylabel = CANNED[args.sweep]
        spec = factory(seeds=range(args.seeds), workers=args.workers)
        results = run_sweep(spec, args.workdir)
        print(f"results: {results}")
        if not args.no_plot:
            image = plot_results(results, Path(args.workdir) / f"{spec.name}.png", title, ylabel)
            print(f"plot: {image}")
        return 0
    if args.command == "plot":
        image = plot_results(args.results, args.out, args.title, args.ylabel)
        print(f"plot: {image}")
        return 0
    ok = replay_manifest(args.workdir, args.fresh)
    print("replay byte-identical" if ok else "replay MISMATCH")
    return 0 if ok else 1


if __name__ == "__main__":
    sys.exit(main())
