import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from defensive_forecasting.protocol import History
from defensive_forecasting.skeptic import (
    MixtureSkeptic,
    MixtureSpec,
    SLLNSkeptic,
    TestFunction,
    TestFunctionSkeptic,
    TwoSidedSkeptic,
    build_skeptic,
    calibration_mixture,
    check_epsilon,
    eval_test_function,
    mixture_fn,
    mixture_from_descriptor,
    slln_stake,
    test_fn_strategy,
    two_sided_fn,
)

import oracles
from conftest import histories

GRID = np.linspace(0, 1, 101)


def hist(*pairs):
    return History.from_arrays([p for p, _ in pairs], [y for _, y in pairs])


# -- test functions ---------------------------------------------------------

def test_test_function_peak_and_half_width():
    tf = TestFunction(0.3, 0.1)
    assert eval_test_function(tf, 0.3) == 1.0
    assert eval_test_function(tf, 0.4) == pytest.approx(math.exp(-0.5), rel=1e-12)
    assert eval_test_function(tf, 0.4) == pytest.approx(0.606531, abs=1e-6)


def test_object_aware_test_function():
    tf = TestFunction(0.5, 0.1, ref_object=(1.0, -2.0), object_width=0.5)
    assert eval_test_function(tf, 0.5, (1.0, -2.0)) == 1.0
    assert eval_test_function(tf, 0.5, (1.5, -2.0)) == pytest.approx(math.exp(-0.5), rel=1e-12)
    with pytest.raises(ValueError):
        eval_test_function(tf, 0.5)
    with pytest.raises(ValueError):
        eval_test_function(TestFunction(0.5, 0.1), 0.5, (0.0,))


@given(st.floats(0, 1), st.floats(0.001, 2), st.floats(0, 1))
def test_test_function_range(c, w, p):
    v = eval_test_function(TestFunction(c, w), p)
    assert 0.0 <= v <= 1.0


def test_epsilon_bounds():
    assert check_epsilon(-0.5) == -0.5
    for bad in (0.0, 0.51, -0.6):
        with pytest.raises(ValueError):
            check_epsilon(bad)
    with pytest.raises(ValueError):
        check_epsilon(-0.1, signed=False)


# -- SLLN and two-sided strategies -----------------------------------------

def test_slln_stake_examples():
    assert slln_stake(History(), 0.1) == 0.1
    assert slln_stake(hist((0.5, 1)), 0.5) == pytest.approx(0.625, rel=1e-15)


def test_slln_stake_five_rounds_matches_product_oracle():
    ps, ys = [0.1, 0.9, 0.5, 0.35, 0.72], [1, 0, 0, 1, 1]
    expected = 0.2583227124023438  # 0.25 * prod(1 + 0.25 (y - p)) from oracles.product_capital
    got = slln_stake(History.from_arrays(ps, ys), 0.25)
    assert got == pytest.approx(expected, abs=1e-12)
    assert got == pytest.approx(0.25 * oracles.product_capital(0.25, ps, ys), abs=1e-12)


def test_two_sided_examples():
    assert two_sided_fn(History(), 0.1).values(GRID).tolist() == [0.0] * 101
    assert two_sided_fn(hist((0.5, 1), (0.5, 0)), 0.3)(0.7) == pytest.approx(0.0, abs=1e-15)
    f = two_sided_fn(hist((0.2, 1)), 0.1)
    assert np.allclose(f.values(GRID), 0.016, atol=1e-15, rtol=0)


# -- test-function strategies ----------------------------------------------

def test_test_fn_strategy_empty_history():
    tf = TestFunction(0.4, 0.1)
    f = test_fn_strategy(History(), [], 0.2, tf)
    assert f(0.4) == pytest.approx(0.2)
    np.testing.assert_allclose(f.values(GRID), 0.2 * tf(GRID), rtol=1e-15)


def test_test_fn_strategy_reduces_to_slln_for_constant_test_function():
    h = History.from_arrays([0.1, 0.6, 0.3], [1, 1, 0])
    f = test_fn_strategy(h, [], 0.3, TestFunction(0.5, math.inf))
    np.testing.assert_allclose(f.values(GRID), slln_stake(h, 0.3), rtol=1e-14)


def test_test_fn_strategy_matches_transcription_oracle():
    ps, ys = [0.3, 0.55, 0.5], [1, 0, 1]
    f = test_fn_strategy(History.from_arrays(ps, ys), [], 0.2, TestFunction(0.5, 0.1))
    # values frozen from oracles.test_fn_value
    frozen = {0.0: 7.543016679081891e-07, 0.5: 0.20240726278465285, 1.0: 7.543016679081891e-07}
    for p, v in frozen.items():
        assert f(p) == pytest.approx(v, abs=1e-12)
        assert f(p) == pytest.approx(oracles.test_fn_value(p, 0.2, 0.5, 0.1, ps, ys), abs=1e-12)


def test_object_aware_strategy_uses_current_object():
    tf = TestFunction(0.5, 0.2, ref_object=(0.0,), object_width=0.1)
    h = History.from_arrays([0.5, 0.5], [1, 1], [[0.0], [5.0]])
    near = test_fn_strategy(h, [0.0], 0.5, tf)
    far = test_fn_strategy(h, [1.0], 0.5, tf)
    # only the first round matches the reference object
    k = 1 + 0.5 * 1.0 * 0.5
    assert near(0.5) == pytest.approx(0.5 * k, rel=1e-12)
    assert far(0.5) == pytest.approx(0.5 * k * math.exp(-50), rel=1e-12)


@settings(max_examples=100, deadline=None)
@given(histories(max_size=30), st.floats(-0.5, 0.5).filter(lambda e: e != 0),
       st.floats(0, 1), st.floats(0.01, 1))
def test_capital_factors_stay_positive(h, eps, c, w):
    f = test_fn_strategy(h, [], eps, TestFunction(c, w))
    v = f.values(GRID)
    # |f| = |eps| I(p) K with K >= 0.5^n > 0
    assert np.all(np.sign(v[v != 0]) == np.sign(eps))
    assert abs(f(c)) >= abs(eps) * 0.5 ** len(h)


@settings(max_examples=50, deadline=None)
@given(histories(max_size=20), st.floats(0, 1), st.floats(0.02, 0.5))
def test_strategy_lipschitz_spot_check(h, c, w):
    eps = 0.3
    f = test_fn_strategy(h, [], eps, TestFunction(c, w))
    fine = np.linspace(0, 1, 4001)
    v = f.values(fine)
    slopes = np.abs(np.diff(v)) / np.diff(fine)
    # |dI/dp| <= e^{-1/2} / w, times the capital product
    bound = eps * math.exp(-0.5) / w * abs(f(c) / eps)
    assert slopes.max() <= bound * (1 + 1e-9)


# -- mixtures -------------------------------------------------------------

def test_mixture_single_component():
    sk = TestFunctionSkeptic(0.2, TestFunction(0.3, 0.1))
    h = History.from_arrays([0.2, 0.7], [0, 1])
    m = mixture_fn(MixtureSpec([(sk, 1.0)]), h, [])
    np.testing.assert_array_equal(m.values(GRID), sk.announce(h, []).values(GRID))


def test_mixture_plus_minus_cancels_on_empty_history():
    tf = TestFunction(0.3, 0.1)
    spec = MixtureSpec([(TestFunctionSkeptic(0.2, tf), 0.5), (TestFunctionSkeptic(-0.2, tf), 0.5)])
    np.testing.assert_allclose(mixture_fn(spec, History(), []).values(GRID), 0.0, atol=1e-17)


def test_mixture_grid_matches_weighted_sum_oracle(rng):
    from conftest import random_history

    h = random_history(rng, 25)
    spec = calibration_mixture(eps=0.2, width=0.1, n_centers=11)
    assert len(spec.components) == 22
    got = mixture_fn(spec, h, []).values(GRID)
    ps, ys = h.p.tolist(), h.y.tolist()
    for j, p in enumerate(GRID):
        want = 0.0
        for c in np.linspace(0, 1, 11):
            for eps in (0.2, -0.2):
                want += oracles.test_fn_value(p, eps, c, 0.1, ps, ys) / 22
        assert got[j] == pytest.approx(want, abs=1e-12)


def test_mixture_weight_validation():
    sk = SLLNSkeptic(0.1)
    with pytest.raises(ValueError):
        MixtureSpec([(sk, 0.5), (sk, 0.4)])
    with pytest.raises(ValueError):
        MixtureSpec([(sk, 1.5), (sk, -0.5)])
    with pytest.raises(ValueError):
        MixtureSpec([])
    MixtureSpec([(sk, 0.5), (sk, 0.5 + 1e-13)])


def test_eps_level_grid():
    spec = calibration_mixture(width=0.1, n_centers=3, eps_levels=4)
    eps = sorted({abs(s.eps) for s, _ in spec.components})
    assert eps == [2 ** -4, 2 ** -3, 2 ** -2, 2 ** -1]
    assert len(spec.components) == 4 * 3 * 2


def test_mixture_descriptor():
    spec = mixture_from_descriptor({"components": [
        {"kind": "testfn", "eps": 0.1, "center": 0.3, "width": 0.05, "weight": 0.25},
        {"kind": "slln", "eps": -0.2, "weight": 0.75},
    ]})
    assert isinstance(spec.components[0][0], TestFunctionSkeptic)
    assert spec.components[1][0].eps == -0.2
    grid_spec = mixture_from_descriptor({"grid": {"eps": 0.1, "width": 0.05, "n_centers": 5}})
    assert len(grid_spec.components) == 10


def test_build_skeptic_kinds():
    assert isinstance(build_skeptic("twosided", eps=0.2), TwoSidedSkeptic)
    assert isinstance(build_skeptic("mixture"), MixtureSkeptic)
    assert build_skeptic("slln", eps=0.1, game="I").game == "I"
    with pytest.raises(ValueError):
        build_skeptic("testfn", game="I")
    with pytest.raises(ValueError):
        build_skeptic("martingale")
