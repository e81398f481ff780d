#!/usr/bin/env python3
"""Write the data behind every outage, gain and throughput plot as CSV.

    python scripts/reproduce_figures.py --out-dir figures --trials 100000

Each file is produced through the same code path as the ``twohop`` CLI, so
the header block records the config hash and seed.
"""

import argparse
from dataclasses import replace
from pathlib import Path

from twohop import cli

FIGURES = {
    "direct_outage": ("sweep", dict(scheme="retransmit", betas=(0.25, 0.5, 0.75, 1.0))),
    "nearest_outage": ("sweep", dict(scheme="nearest", betas=(0.25, 0.75))),
    "best_outage": ("sweep", dict(scheme="best", betas=(0.25, 0.75))),
    "nearest_gain": ("gain", dict(scheme="nearest", betas=(0.25, 0.75))),
    "best_gain": ("gain", dict(scheme="best", betas=(0.25, 0.75))),
    "throughput": ("throughput", dict(scheme="best", betas=(0.0, 0.25, 0.5, 0.75, 1.0))),
}


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out-dir", type=Path, default=Path("figures"))
    ap.add_argument("--trials", type=int, default=100_000)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--workers", type=int, default=1)
    ap.add_argument("--only", nargs="*", choices=sorted(FIGURES))
    args = ap.parse_args()
    args.out_dir.mkdir(parents=True, exist_ok=True)
    base = cli.ExperimentConfig(trials=args.trials, seed=args.seed)
    run = {"sweep": cli.cmd_sweep, "gain": cli.cmd_gain, "throughput": cli.cmd_throughput}
    for name in args.only or FIGURES:
        command, over = FIGURES[name]
        cfg = replace(base, **over)
        path = args.out_dir / f"{name}.csv"
        path.write_text(run[command](cfg, workers=args.workers))
        print(f"wrote {path}")


if __name__ == "__main__":
    main()
