#!/usr/bin/env python3
"""Error asymptotes of direct, nearest and best transmission next to simulation.

Also prints the exact finite-SNR value where one is available: the closed
form for direct transmission and the semi-analytic integral for the nearest
relay (both on the simulated 25-cell lattice).
"""

import argparse

from twohop import analytic
from twohop.channel import SystemParams
from twohop.montecarlo import RelayScheme, simulate
from twohop.quadrature import QuadratureSpec


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--snr-db", type=float, nargs="*", default=[25.0, 30.0, 35.0, 40.0])
    ap.add_argument("--beta", type=float, nargs="*", default=[0.25, 0.75])
    ap.add_argument("--trials", type=int, default=1_000_000)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()
    base = SystemParams()
    print("quantity,beta,snr_db,asymptote,exact,mc,mc_stderr")
    for beta in args.beta:
        for s in args.snr_db:
            p = base.at(s, beta)
            q = QuadratureSpec.matching(p)
            d = simulate(p, RelayScheme.NEAREST, args.trials, args.seed)
            pd, pr = d.p_direct(), d.p_relay()
            exact_d = 1 - analytic.p_direct(p, q)
            exact_n = 1 - analytic.nearest_success_semianalytic(p, q) / p.profile.mu
            rows = [
                ("direct", analytic.p_direct_asymptote(beta, p)(p.snr), exact_d, 1 - pd.value, pd.stderr),
                ("nearest", analytic.nearest_error_asymptote(beta, p)(p.snr), exact_n, 1 - pr.value, pr.stderr),
            ]
            b = simulate(p, RelayScheme.BEST, args.trials, args.seed).p_relay()
            rows.append(("best", analytic.best_error_asymptote(beta, p)(p.snr), float("nan"), 1 - b.value, b.stderr))
            for name, asym, exact, mc, se in rows:
                print(f"{name},{beta:g},{s:g},{asym:.6g},{exact:.6g},{mc:.6g},{se:.3g}")


if __name__ == "__main__":
    main()
