"""How often the K29 / Laplace agreement thresholds hold across seeds.

K29 with a narrow kernel occasionally meets a residual sum that is positive
(or negative) everywhere and jumps to 1 (or 0) for a round; whether such a
jump happens after round 50 depends on the bit sequence.
"""

import argparse

import numpy as np

from defensive_forecasting.forecaster import K29Config, K29Forecaster, LaplaceForecaster, RootSolverConfig
from defensive_forecasting.kernels import KernelSpec
from defensive_forecasting.protocol import run_game
from defensive_forecasting.reality import BernoulliReality


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--seeds", type=int, default=50)
    ap.add_argument("--n", type=int, default=1000)
    ap.add_argument("--method", choices=("scan", "plain"), default="scan")
    args = ap.parse_args()

    k29 = K29Forecaster(K29Config(KernelSpec(0.01), RootSolverConfig(method=args.method)))
    passed = []
    for seed in range(args.seeds):
        ha, _ = run_game(k29, [], BernoulliReality(0.5), args.n, seed)
        hb, _ = run_game(LaplaceForecaster(), [], BernoulliReality(0.5), args.n, seed)
        d = np.abs(ha.p - hb.p)[49:]
        ok = d.mean() <= 0.02 and d.max() <= 0.1
        passed += [seed] if ok else []
        print(f"seed {seed:3d}  mean {d.mean():.4f}  max {d.max():.4f}  {'ok' if ok else '--'}")
    print(f"{len(passed)}/{args.seeds} seeds meet both thresholds: {passed}")


if __name__ == "__main__":
    main()
