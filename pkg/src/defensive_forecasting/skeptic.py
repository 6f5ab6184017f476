"""Gambling strategies for Skeptic.

Every strategy is a pure function of the history (and, for object-aware
strategies, the current object). Capital products are accumulated as sums of
``log1p`` terms; with ``|eps| <= 0.5`` and test functions valued in [0, 1]
every factor is at least 0.5, so the logarithms are always defined.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .protocol import History, SkepticFunction


def check_epsilon(eps: float, signed: bool = True) -> float:
    eps = float(eps)
    lo = -0.5 if signed else 0.0
    if not (lo <= eps <= 0.5) or eps == 0.0:
        allowed = "0 < |eps| <= 0.5" if signed else "0 < eps <= 0.5"
        raise ValueError(f"eps must satisfy {allowed}, got {eps!r}")
    return eps


@dataclass(frozen=True)
class TestFunction:
    """Gaussian bump on forecasts, optionally times a Gaussian bump on objects.

    ``I(p, x) = exp(-(p - c)^2 / (2 w^2)) * exp(-|x - x_ref|^2 / (2 v^2))``
    with the object factor present only when ``ref_object`` is given. An
    infinite ``width`` gives the constant test function I = 1.
    """

    __test__ = False  # not a pytest class

    center: float
    width: float
    ref_object: tuple[float, ...] | None = None
    object_width: float | None = None

    def __post_init__(self):
        if not self.width > 0:
            raise ValueError("test function width must be > 0")
        if self.ref_object is not None:
            object.__setattr__(self, "ref_object", tuple(float(v) for v in self.ref_object))
            if not (self.object_width is not None and self.object_width > 0):
                raise ValueError("object_width must be > 0 when ref_object is given")

    @property
    def object_aware(self) -> bool:
        return self.ref_object is not None

    def forecast_factor(self, p):
        if math.isinf(self.width):
            return np.ones_like(np.asarray(p, dtype=float))
        d = np.asarray(p, dtype=float) - self.center
        return np.exp(-(d * d) / (2.0 * self.width ** 2))

    def object_factor(self, xs) -> np.ndarray:
        """Object factor for one object (1-D) or a stack of objects (2-D)."""
        xs = np.asarray(xs, dtype=float)
        ref = np.asarray(self.ref_object)
        d2 = np.sum((xs - ref) ** 2, axis=-1)
        return np.exp(-d2 / (2.0 * self.object_width ** 2))

    def __call__(self, p, x=None):
        return eval_test_function(self, p, x)


def eval_test_function(tf: TestFunction, p, x=None):
    """Value of ``tf`` at forecast ``p`` (scalar or array) and object ``x``."""
    if tf.object_aware != (x is not None):
        raise ValueError("an object must be supplied iff the test function has a reference object")
    v = tf.forecast_factor(p)
    if x is not None:
        v = v * tf.object_factor(x)
    return float(v) if np.ndim(v) == 0 else v


def _log_capital(eps: float, weights, history: History) -> float:
    """log prod_i (1 + eps * w_i * (y_i - p_i))."""
    if len(history) == 0:
        return 0.0
    return float(np.sum(np.log1p(eps * weights * (history.y - history.p))))


def slln_stake(history: History, eps: float) -> float:
    """Stake eps * K_{n-1} of the eps-SLLN strategy, K being its own capital."""
    eps = check_epsilon(eps)
    return eps * math.exp(_log_capital(eps, 1.0, history))


def two_sided_fn(history: History, eps: float) -> SkepticFunction:
    """Constant function eps * (prod(1 + eps r_i) - prod(1 - eps r_i)), r_i = y_i - p_i."""
    eps = check_epsilon(eps, signed=False)
    up = math.exp(_log_capital(eps, 1.0, history))
    down = math.exp(_log_capital(-eps, 1.0, history))
    return SkepticFunction.constant(eps * (up - down))


def test_function_weights(tf: TestFunction, history: History) -> np.ndarray:
    """I(p_i, x_i) for every past round."""
    w = tf.forecast_factor(history.p)
    if tf.object_aware:
        w = w * tf.object_factor(history.x)
    return w


test_function_weights.__test__ = False


def test_fn_strategy(history: History, x_now, eps: float, tf: TestFunction) -> SkepticFunction:
    """p -> eps * I(p, x_now) * prod_i (1 + eps * I(p_i, x_i) * (y_i - p_i))."""
    eps = check_epsilon(eps)
    scale = eps * math.exp(_log_capital(eps, test_function_weights(tf, history), history))
    obj = tf.object_factor(x_now) if tf.object_aware else 1.0

    def fn(ps):
        return scale * obj * tf.forecast_factor(ps)

    return SkepticFunction(fn, vectorized=True)


test_fn_strategy.__test__ = False


# -- strategy objects for the game engine ----------------------------------

class ZeroSkeptic:
    """Never bets; usable in either game."""

    def __init__(self, game: str = "II"):
        self.game = game

    def announce(self, history, x):
        return SkepticFunction.constant(0.0)

    def stake(self, history, x, p):
        return 0.0


class SLLNSkeptic:
    """The eps-SLLN strategy s_n = eps * K_{n-1}.

    In Game II it announces the constant function equal to its stake.
    """

    def __init__(self, eps: float, game: str = "II"):
        self.eps = check_epsilon(eps)
        self.game = game

    def announce(self, history, x):
        return SkepticFunction.constant(slln_stake(history, self.eps))

    def stake(self, history, x, p):
        return slln_stake(history, self.eps)


class TwoSidedSkeptic:
    game = "II"

    def __init__(self, eps: float):
        self.eps = check_epsilon(eps, signed=False)

    def announce(self, history, x):
        return two_sided_fn(history, self.eps)


class TestFunctionSkeptic:
    game = "II"
    __test__ = False

    def __init__(self, eps: float, tf: TestFunction):
        self.eps = check_epsilon(eps)
        self.tf = tf

    def announce(self, history, x):
        return test_fn_strategy(history, x, self.eps, self.tf)


@dataclass
class MixtureSpec:
    """Convex combination of Game II strategies."""

    components: Sequence[tuple[object, float]]

    def __post_init__(self):
        if not self.components:
            raise ValueError("a mixture needs at least one component")
        weights = [w for _, w in self.components]
        if any(not w > 0 for w in weights):
            raise ValueError("mixture weights must be positive")
        if abs(math.fsum(weights) - 1.0) > 1e-12:
            raise ValueError(f"mixture weights sum to {math.fsum(weights)!r}, not 1")


def mixture_fn(spec: MixtureSpec, history: History, x_now) -> SkepticFunction:
    fns = [(s.announce(history, x_now), w) for s, w in spec.components]

    def fn(ps):
        total = np.zeros(np.shape(ps))
        for f, w in fns:
            total = total + w * f.values(ps)
        return total

    return SkepticFunction(fn, vectorized=True)


class MixtureSkeptic:
    game = "II"

    def __init__(self, spec: MixtureSpec):
        self.spec = spec

    def announce(self, history, x):
        return mixture_fn(self.spec, history, x)


def calibration_mixture(eps: float = 0.1, width: float = 0.05, n_centers: int = 11,
                        eps_levels: int | None = None) -> MixtureSpec:
    """Uniform mixture of +-eps Gaussian-bump strategies on an even grid of centers.

    With ``eps_levels = k`` the single ``eps`` is replaced by the geometric grid
    1/2, 1/4, ..., 2^-k.
    """
    centers = np.linspace(0.0, 1.0, n_centers)
    levels = [2.0 ** -j for j in range(1, eps_levels + 1)] if eps_levels else [check_epsilon(eps, signed=False)]
    comps = [TestFunctionSkeptic(sign * e, TestFunction(float(c), width))
             for e in levels for c in centers for sign in (1, -1)]
    w = 1.0 / len(comps)
    return MixtureSpec([(s, w) for s in comps])


SKEPTIC_KINDS = ("zero", "slln", "twosided", "testfn", "mixture")


def build_skeptic(kind: str, eps: float = 0.1, center: float = 0.5, width: float = 0.05,
                  game: str = "II", mixture: dict | None = None):
    """Construct a Skeptic strategy from flat parameters (CLI and JSON descriptors)."""
    if kind == "zero":
        return ZeroSkeptic(game)
    if kind == "slln":
        return SLLNSkeptic(eps, game)
    if game != "II":
        raise ValueError(f"{kind} Skeptic only plays Game II")
    if kind == "twosided":
        return TwoSidedSkeptic(eps)
    if kind == "testfn":
        return TestFunctionSkeptic(eps, TestFunction(center, width))
    if kind == "mixture":
        if mixture is None:
            return MixtureSkeptic(calibration_mixture(eps, width))
        return MixtureSkeptic(mixture_from_descriptor(mixture))
    raise ValueError(f"unknown Skeptic kind {kind!r}; choose from {SKEPTIC_KINDS}")


def mixture_from_descriptor(desc: dict) -> MixtureSpec:
    """Mixture from a JSON descriptor.

    Either ``{"grid": {"eps": 0.1, "width": 0.05, "n_centers": 11, "eps_levels": null}}``
    or ``{"components": [{"kind": "testfn", "eps": 0.1, "center": 0.3,
    "width": 0.05, "weight": 0.5}, ...]}``.
    """
    if "grid" in desc:
        return calibration_mixture(**desc["grid"])
    comps = []
    for c in desc.get("components", []):
        c = dict(c)
        weight = c.pop("weight")
        kind = c.pop("kind")
        if kind == "mixture":
            raise ValueError("nested mixtures are not supported")
        comps.append((build_skeptic(kind, **c), float(weight)))
    return MixtureSpec(comps)
