"""K29 (sigma = 0.01) and Laplace on one Bernoulli(0.5) stream of 1000 bits.

Writes the duel CSV, a summary and an SVG of both forecast paths.
"""

import argparse
from pathlib import Path

from defensive_forecasting.cli import cmd_duel, cmd_plot, DEFAULTS


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--seed", type=int, default=4)
    ap.add_argument("--n", type=int, default=1000)
    ap.add_argument("--bisection-iters", type=int, default=10)
    ap.add_argument("--out", default="results/fair_coin")
    args = ap.parse_args()

    cfg = dict(DEFAULTS, forecaster="k29", forecaster_b="laplace", sigma=0.01, theta=0.5,
               n=args.n, seed=args.seed, bisection_iters=args.bisection_iters, out=args.out,
               summary_from=50)
    s = cmd_duel(cfg)
    cmd_plot(Path(args.out) / "duel.csv", ["p_A", "p_B"], Path(args.out) / "forecasts.svg")
    print(f"seed {args.seed}: rounds 50-{args.n} mean |K29 - Laplace| = {s['mean_abs_diff']:.4f}, "
          f"max = {s['max_abs_diff']:.4f}")


if __name__ == "__main__":
    main()
