"""Agreement between forecasts and labels.

The two bound checks are finite-sample forms of the law-of-large-numbers
argument behind the SLLN and test-function Skeptics: if the Skeptic's
capital never exceeds C, the (weighted) mean residual is at most
``ln C / (eps * W) + eps``. They hold for every history, so a failure means
a bug, not bad luck.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field

import numpy as np

from .forecaster import ConstantForecaster
from .protocol import History, run_game
from .reality import BernoulliReality
from .skeptic import TestFunction, check_epsilon, test_function_weights

# relative slack for float rounding in the bound comparisons
BOUND_RTOL = 1e-12


def bias_trace(history: History) -> np.ndarray:
    """Running mean of y_i - p_i after each round."""
    if len(history) == 0:
        raise ValueError("history is empty")
    resid = history.y - history.p
    return np.cumsum(resid) / np.arange(1, len(resid) + 1)


@dataclass
class CalibrationBin:
    lower: float
    upper: float
    count: int
    mean_forecast: float
    mean_label: float

    @property
    def gap(self) -> float:
        return self.mean_label - self.mean_forecast


def bin_index(p, bin_count: int) -> np.ndarray:
    """Equal-width bins: [0, 1/B], (1/B, 2/B], ..., ((B-1)/B, 1]."""
    edges = np.linspace(0.0, 1.0, bin_count + 1)
    return np.clip(np.searchsorted(edges, p, side="left") - 1, 0, bin_count - 1)


def calibration_report(history: History, bin_count: int = 20) -> list[CalibrationBin]:
    """Per-bin forecast and label means. Empty bins report NaN means."""
    if bin_count < 1:
        raise ValueError("bin_count must be >= 1")
    p, y = history.p, history.y
    idx = bin_index(p, bin_count)
    edges = np.linspace(0.0, 1.0, bin_count + 1)
    bins = []
    for b in range(bin_count):
        mask = idx == b
        n = int(mask.sum())
        mp = float(p[mask].mean()) if n else math.nan
        my = float(y[mask].mean()) if n else math.nan
        bins.append(CalibrationBin(float(edges[b]), float(edges[b + 1]), n, mp, my))
    return bins


@dataclass
class BoundReport:
    c_observed: float
    lhs: float
    rhs: float
    holds: bool
    applicable: bool = True

    def to_dict(self) -> dict:
        return asdict(self)


def _bound(resid, weights, eps) -> BoundReport:
    logs = np.cumsum(np.log1p(eps * weights * resid))
    log_c = max(0.0, float(logs.max()))  # the sup includes K_0 = 1
    total_w = float(np.sum(weights))
    lhs = float(np.sum(weights * resid)) / total_w
    rhs = log_c / (eps * total_w) + eps
    holds = lhs <= rhs + BOUND_RTOL * max(1.0, abs(rhs))
    return BoundReport(math.exp(log_c), lhs, rhs, bool(holds))


def slln_bound_check(history: History, eps: float) -> BoundReport:
    """Check (1/n) sum(y_i - p_i) <= ln C / (eps n) + eps with C the sup of the SLLN capital."""
    eps = check_epsilon(eps, signed=False)
    if len(history) == 0:
        raise ValueError("history is empty")
    resid = history.y - history.p
    return _bound(resid, np.ones_like(resid), eps)


def calibration_bound_check(history: History, eps: float, tf: TestFunction,
                            min_weight: float = 1e-15) -> BoundReport:
    """I-weighted version of ``slln_bound_check`` for the test-function Skeptic.

    Not applicable (``applicable=False``, ``holds=True``) when every weight
    I(p_i, x_i) is below ``min_weight``.
    """
    eps = check_epsilon(eps, signed=False)
    if len(history) == 0:
        raise ValueError("history is empty")
    w = test_function_weights(tf, history)
    if not np.any(w >= min_weight):
        return BoundReport(1.0, math.nan, math.nan, True, applicable=False)
    return _bound(history.y - history.p, w, eps)


@dataclass
class ValidityReport:
    mean_final_capital: float
    std_error: float
    tail_freq: dict[float, float] = field(default_factory=dict)
    runs: int = 0

    def to_dict(self) -> dict:
        d = asdict(self)
        d["tail_freq"] = {str(k): v for k, v in self.tail_freq.items()}
        return d


def _one_run(args):
    skeptic, theta, n, seed = args
    _, (ledger,) = run_game(ConstantForecaster(theta), [skeptic], BernoulliReality(theta), n, seed,
                            designated=None)
    return ledger.values[-1], max(ledger.values)


def run_seeds(seed: int, runs: int) -> list[int]:
    """Independent 64-bit game seeds derived from one master seed."""
    states = np.random.SeedSequence(seed).generate_state(runs, dtype=np.uint64)
    return [int(s) for s in states]


def validity_mc(skeptic, theta: float, n: int, runs: int, seed: int,
                thresholds=(2.0,), workers: int = 1) -> ValidityReport:
    """Monte Carlo check of the testing interpretation under the true probability.

    Forecaster announces ``theta`` every round and labels are Bernoulli(theta),
    so the Skeptic's capital is a martingale: its mean stays at 1 and
    sup_n K_n >= C has probability at most 1/C.

    Results depend only on ``seed``: each run gets its own derived seed and the
    runs are aggregated in seed order, so ``workers > 1`` gives identical output.
    """
    jobs = [(skeptic, theta, n, s) for s in run_seeds(seed, runs)]
    if workers > 1:
        from concurrent.futures import ProcessPoolExecutor

        with ProcessPoolExecutor(workers) as pool:
            out = list(pool.map(_one_run, jobs, chunksize=max(1, runs // (4 * workers))))
    else:
        out = [_one_run(j) for j in jobs]
    final = np.array([o[0] for o in out])
    sup = np.array([o[1] for o in out])
    se = float(final.std(ddof=1) / math.sqrt(runs)) if runs > 1 else math.nan
    tails = {float(c): float(np.mean(sup >= c)) for c in thresholds}
    return ValidityReport(float(final.mean()), se, tails, runs)
