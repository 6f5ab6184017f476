import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from defensive_forecasting.metrics import (
    bias_trace,
    bin_index,
    calibration_bound_check,
    calibration_report,
    run_seeds,
    slln_bound_check,
    validity_mc,
)
from defensive_forecasting.protocol import History
from defensive_forecasting.skeptic import SLLNSkeptic, TestFunction, ZeroSkeptic

import oracles
from conftest import histories, random_history


def test_bias_trace_examples():
    assert bias_trace(History.from_arrays([0.0, 1.0, 1.0], [0, 1, 1])).tolist() == [0.0] * 3
    assert bias_trace(History.from_arrays([0.5], [1])).tolist() == [0.5]
    with pytest.raises(ValueError):
        bias_trace(History())


def test_bias_trace_matches_summation_oracle(rng):
    h = random_history(rng, 1000)
    want = oracles.running_means(h.p.tolist(), h.y.tolist())
    np.testing.assert_allclose(bias_trace(h), want, rtol=0, atol=1e-12)


@given(histories(min_size=1))
def test_bias_trace_range(h):
    t = bias_trace(h)
    assert np.all(np.abs(t) <= 1)


def test_bin_edges_are_right_closed_except_first():
    assert bin_index(np.array([0.0, 0.05, 0.050001, 0.1, 1.0]), 20).tolist() == [0, 0, 1, 1, 19]


def test_single_bin_gap():
    h = History.from_arrays([0.2, 0.9, 0.5], [1, 0, 1])
    (b,) = calibration_report(h, 1)
    assert b.count == 3
    assert b.gap == pytest.approx(2 / 3 - 1.6 / 3, abs=1e-15)


def test_all_ones_in_one_bin():
    h = History.from_arrays([0.31, 0.32, 0.33], [1, 1, 1])
    bins = calibration_report(h, 10)
    assert [b.count for b in bins] == [0, 0, 0, 3] + [0] * 6
    assert bins[3].mean_label == 1.0
    assert math.isnan(bins[0].gap)


def test_calibrated_history_has_small_gaps(rng):
    h = random_history(rng, 10**5)
    for b in calibration_report(h, 20):
        if b.count >= 500:
            assert abs(b.gap) <= 0.05


@given(histories(), st.integers(1, 30))
def test_bins_partition(h, k):
    bins = calibration_report(h, k)
    assert sum(b.count for b in bins) == len(h)
    assert bins[0].lower == 0.0 and bins[-1].upper == 1.0
    for b in bins:
        if b.count:
            assert -1 <= b.gap <= 1
            assert b.lower <= b.mean_forecast <= b.upper


def test_calibration_report_rejects_zero_bins():
    with pytest.raises(ValueError):
        calibration_report(History(), 0)


# -- bound checks ------------------------------------------------------------

def test_slln_bound_example():
    r = slln_bound_check(History.from_arrays([0.5], [1]), 0.5)
    assert r.c_observed == pytest.approx(1.25, rel=1e-15)
    assert r.lhs == 0.5
    assert r.rhs == pytest.approx(math.log(1.25) / 0.5 + 0.5, rel=1e-15)
    assert r.rhs == pytest.approx(0.9463, abs=1e-4)
    assert r.holds


def test_slln_bound_all_certain():
    r = slln_bound_check(History.from_arrays([1.0] * 5, [1] * 5), 0.3)
    assert r.lhs == 0.0 and r.holds and r.c_observed == 1.0


def test_slln_bound_rejects_bad_eps():
    h = History.from_arrays([0.5], [1])
    for eps in (0.0, -0.1, 0.6):
        with pytest.raises(ValueError):
            slln_bound_check(h, eps)


def test_bounds_hold_on_ten_thousand_histories():
    rng = np.random.default_rng(123)
    for _ in range(10**4):
        n = int(rng.integers(1, 60))
        p = rng.random(n) ** rng.uniform(0.2, 5)  # skewed forecasts, labels unrelated to them
        y = (rng.random(n) < rng.random()).astype(int)
        h = History.from_arrays(p, y)
        eps = float(rng.uniform(1e-3, 0.5))
        assert slln_bound_check(h, eps).holds
        tf = TestFunction(float(rng.random()), float(rng.uniform(0.01, 0.5)))
        assert calibration_bound_check(h, eps, tf).holds


@settings(max_examples=300)
@given(histories(min_size=1), st.floats(1e-3, 0.5), st.floats(0, 1), st.floats(0.005, 1))
def test_bound_checks_hold(h, eps, c, w):
    assert slln_bound_check(h, eps).holds
    assert calibration_bound_check(h, eps, TestFunction(c, w)).holds


def test_constant_test_function_reduces_to_slln(rng):
    h = random_history(rng, 200)
    a = slln_bound_check(h, 0.2)
    b = calibration_bound_check(h, 0.2, TestFunction(0.5, math.inf))
    assert a == b


def test_calibration_bound_matches_oracle_capital():
    ps, ys = [0.3, 0.55, 0.5], [1, 0, 1]
    r = calibration_bound_check(History.from_arrays(ps, ys), 0.2, TestFunction(0.5, 0.1))
    caps = [1.0] + [oracles.product_capital(0.2, ps[:k], ys[:k], [oracles.bump(q, 0.5, 0.1) for q in ps[:k]])
                    for k in range(1, 4)]
    assert r.c_observed == pytest.approx(max(caps), rel=1e-12)


def test_calibration_bound_not_applicable():
    h = History.from_arrays([0.0, 0.05], [1, 0])
    r = calibration_bound_check(h, 0.1, TestFunction(1.0, 0.01))
    assert not r.applicable and r.holds


# -- validity ---------------------------------------------------------------

def test_run_seeds_deterministic():
    assert run_seeds(5, 4) == run_seeds(5, 4)
    assert len(set(run_seeds(5, 100))) == 100


def test_validity_zero_skeptic():
    r = validity_mc(ZeroSkeptic("I"), 0.5, 50, 200, seed=0)
    assert r.mean_final_capital == 1.0
    assert r.tail_freq[2.0] == 0.0


def test_validity_slln_small():
    r = validity_mc(SLLNSkeptic(0.1, "I"), 0.3, 50, 500, seed=1)
    assert abs(r.mean_final_capital - 1) <= 4 * r.std_error
    assert r.tail_freq[2.0] <= 0.5
    assert r == validity_mc(SLLNSkeptic(0.1, "I"), 0.3, 50, 500, seed=1)


def test_validity_parallel_matches_serial():
    sk = SLLNSkeptic(0.2, "I")
    assert validity_mc(sk, 0.5, 20, 40, seed=3, workers=2) == validity_mc(sk, 0.5, 20, 40, seed=3)
