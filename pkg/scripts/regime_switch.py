"""K29 and Laplace on 1000 fair bits, then 1000 zeros, then 1000 ones."""

import argparse
from pathlib import Path

import numpy as np

from defensive_forecasting.cli import DEFAULTS, cmd_duel, cmd_plot


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--script", default="1000:0.5,1000:0,1000:1")
    ap.add_argument("--out", default="results/regime_switch")
    args = ap.parse_args()

    n = sum(int(part.split(":")[0]) for part in args.script.split(","))
    cfg = dict(DEFAULTS, forecaster="k29", forecaster_b="laplace", sigma=0.01, reality="regime",
               script=args.script, n=n, seed=args.seed, out=args.out)
    cmd_duel(cfg)
    out = Path(args.out)
    cmd_plot(out / "duel.csv", ["p_A", "p_B"], out / "forecasts.svg")

    p = np.genfromtxt(out / "duel.csv", delimiter=",", names=True)["p_A"]
    window = p[2000:2400]
    print(f"K29 mean forecast, rounds 1800-2000: {p[1799:2000].mean():.3f}")
    print(f"K29 mean forecast, rounds 2800-3000: {p[2799:3000].mean():.3f}")
    print(f"share of rounds 2001-2400 with forecast in [0.4, 0.6]: {np.mean((window >= 0.4) & (window <= 0.6)):.2f}")


if __name__ == "__main__":
    main()
