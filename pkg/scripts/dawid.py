"""K29 against the label rule y = 1 iff p < 0.5.

Deterministic forecasts cannot be calibrated in the sharp sense here; K29
is pushed to hover at 0.5.
"""

import argparse
from pathlib import Path

import numpy as np

from defensive_forecasting.cli import DEFAULTS, cmd_plot, cmd_run


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--n", type=int, default=1000)
    ap.add_argument("--sigma", type=float, default=0.01)
    ap.add_argument("--out", default="results/dawid")
    args = ap.parse_args()

    cfg = dict(DEFAULTS, forecaster="k29", sigma=args.sigma, reality="dawid", n=args.n, out=args.out,
               skeptic=["slln"])
    cmd_run(cfg)
    out = Path(args.out)
    cmd_plot(out / "trajectory.csv", ["p", "running_bias"], out / "dawid.svg")
    p = np.genfromtxt(out / "trajectory.csv", delimiter=",", names=True)["p"]
    half = len(p) // 2
    print(f"max |p_n - 0.5| for n >= {half}: {np.abs(p[half - 1:] - 0.5).max():.5f}")


if __name__ == "__main__":
    main()
