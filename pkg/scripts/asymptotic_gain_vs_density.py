#!/usr/bin/env python3
"""Limiting gain of both relay schemes against the mobile density lambda_m.

Uses the singular path loss and the destination at (-L/2, L/2), i.e. on a
cell corner; no simulation is involved.
"""

import argparse
import sys
from dataclasses import replace

import numpy as np

from twohop import analytic
from twohop.channel import PathLossModel, SystemParams
from twohop.geometry import IntensityProfile


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--beta", type=float, default=0.75)
    ap.add_argument("--alpha", type=float, default=4.0)
    ap.add_argument("--lam", type=float, nargs="*", default=list(np.arange(1.0, 10.5, 1.0)))
    args = ap.parse_args()
    base = SystemParams(path_loss=PathLossModel("singular", args.alpha), offset=(-0.5, 0.5))
    out = sys.stdout
    out.write("lam_m,beta,nearest_gain,best_gain\n")
    for lam in args.lam:
        p = replace(base, profile=IntensityProfile(lam_m=lam))
        g_n = analytic.asymptotic_gain("nearest", args.beta, p)
        g_b = analytic.asymptotic_gain("best", args.beta, p)
        out.write(f"{lam:.10g},{args.beta:.10g},{g_n:.10g},{g_b:.10g}\n")


if __name__ == "__main__":
    main()
