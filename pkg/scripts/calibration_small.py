"""Unbiasedness in the small with an informative object.

The label probability alternates between two values in segments and is
shown to the forecaster as a one-dimensional object; K29 uses a product
of Gaussian kernels in forecast and object.
"""

import argparse
from pathlib import Path

from defensive_forecasting.cli import DEFAULTS, cmd_calibrate, cmd_run


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--segments", type=int, default=20)
    ap.add_argument("--segment-length", type=int, default=500)
    ap.add_argument("--thetas", default="0.2,0.8")
    ap.add_argument("--sigma", type=float, default=0.05)
    ap.add_argument("--gamma", type=float, default=0.1)
    ap.add_argument("--bins", type=int, default=20)
    ap.add_argument("--out", default="results/calibration")
    args = ap.parse_args()

    thetas = args.thetas.split(",")
    script = ",".join(f"{args.segment_length}:{thetas[i % len(thetas)]}" for i in range(args.segments))
    cfg = dict(DEFAULTS, forecaster="k29", sigma=args.sigma, object_kernel="gaussian", gamma=args.gamma,
               reality="regime", script=script, object_rule="theta",
               n=args.segments * args.segment_length, seed=args.seed, out=args.out)
    cmd_run(cfg)
    out = Path(args.out)
    for b in cmd_calibrate(out / "trajectory.csv", args.bins, out / "bins.csv"):
        if b.count:
            print(f"{'[' if b.lower == 0 else '('}{b.lower:.2f}, {b.upper:.2f}]  n={b.count:5d}  mean p={b.mean_forecast:.3f}  "
                  f"freq={b.mean_label:.3f}  gap={b.gap:+.3f}")


if __name__ == "__main__":
    main()
