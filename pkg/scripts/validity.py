"""Monte Carlo check that a legal Skeptic cannot get rich against true probabilities."""

import argparse
import json

from defensive_forecasting.metrics import validity_mc
from defensive_forecasting.skeptic import SLLNSkeptic


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--eps", type=float, default=0.1)
    ap.add_argument("--theta", type=float, default=0.5)
    ap.add_argument("--n", type=int, default=100)
    ap.add_argument("--runs", type=int, default=10_000)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--workers", type=int, default=1)
    args = ap.parse_args()

    rep = validity_mc(SLLNSkeptic(args.eps, "I"), args.theta, args.n, args.runs, args.seed,
                      thresholds=(2.0, 5.0, 10.0), workers=args.workers)
    print(json.dumps(rep.to_dict(), indent=2))
    for c, f in rep.tail_freq.items():
        print(f"P(sup K >= {c:g}) = {f:.4f}   bound 1/C = {1 / c:.4f}")


if __name__ == "__main__":
    main()
