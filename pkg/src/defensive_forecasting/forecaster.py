"""Forecasting strategies.

``defensive_choose`` turns any continuous Skeptic function into a forecast
at which the Skeptic cannot gain: a root of the function, or the endpoint
where the stake can only lose. K29 applies it to the kernel-weighted
residual sum ``S(p) = sum_i K((p, x), (p_i, x_i)) (y_i - p_i)``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .kernels import KernelSpec, gaussian_forecast_kernel, object_kernel_values
from .protocol import History, SkepticFunction


@dataclass(frozen=True)
class RootSolverConfig:
    grid_points: int = 33
    bisection_iters: int = 10
    root_tolerance: float = 1e-9
    method: str = "scan"

    def __post_init__(self):
        if self.method not in ("scan", "plain"):
            raise ValueError("method must be 'scan' or 'plain'")
        if self.grid_points < 2:
            raise ValueError("grid_points must be >= 2")
        if self.bisection_iters < 1:
            raise ValueError("bisection_iters must be >= 1")
        if not self.root_tolerance > 0:
            raise ValueError("root_tolerance must be > 0")


@dataclass(frozen=True)
class K29Config:
    kernel: KernelSpec = field(default_factory=lambda: KernelSpec(sigma=0.01))
    solver: RootSolverConfig = field(default_factory=RootSolverConfig)


def _finite(v, where):
    if not np.all(np.isfinite(v)):
        raise FloatingPointError(f"Skeptic function is not finite at {where}")
    return v


def defensive_choose(s_fn: SkepticFunction, cfg: RootSolverConfig = RootSolverConfig()) -> float:
    """Forecast p with S(p) = 0, or an endpoint where S(p) * (y - p) <= 0 for both labels.

    The function is sampled on a uniform grid of ``cfg.grid_points`` points;
    "small" means |S| <= ``cfg.root_tolerance``.

    * every sample small: return 0.5 (any forecast is a root);
    * no sample below -tol and S(1) >= 0: return 1;
    * no sample above +tol and S(0) <= 0: return 0;
    * otherwise bisect between consecutive non-small samples of opposite
      sign, preferring the leftmost positive-to-negative crossing and then
      the leftmost negative-to-positive one. Bisection keeps the half whose
      ends differ in sign and stops early at a small midpoint;
    * with no such pair, return the leftmost small sample.

    Small samples are skipped when looking for sign changes: kernel sums
    underflow far from the data and their signs carry no information there.
    With method ``"plain"`` the grid is skipped, see ``plain_bisection``.

    Raises:
        FloatingPointError: if S is not finite at an evaluated point.
    """
    if cfg.method == "plain":
        return plain_bisection(s_fn, cfg.bisection_iters)
    tol = cfg.root_tolerance
    grid = np.linspace(0.0, 1.0, cfg.grid_points)
    v = _finite(s_fn.values(grid), "grid points")
    small = np.abs(v) <= tol
    pos, neg = (v > tol).any(), (v < -tol).any()
    if not (pos or neg):
        return 0.5
    # S(1) >= 0 makes S(1) (y - 1) <= 0 and S(0) <= 0 makes S(0) y <= 0
    if not neg and v[-1] >= 0:
        return 1.0
    if not pos and v[0] <= 0:
        return 0.0

    big = np.flatnonzero(~small)
    signs = np.sign(v[big])
    down = np.flatnonzero((signs[:-1] > 0) & (signs[1:] < 0))
    up = np.flatnonzero((signs[:-1] < 0) & (signs[1:] > 0))
    if down.size == 0 and up.size == 0:
        return float(grid[np.flatnonzero(small)[0]])
    k = down[0] if down.size else up[0]

    ia, ib = big[k], big[k + 1]
    a, b = float(grid[ia]), float(grid[ib])
    left_positive = v[ia] > 0
    for _ in range(cfg.bisection_iters):
        mid = 0.5 * (a + b)
        s = _finite(s_fn(mid), mid)
        if abs(s) <= tol:
            return mid
        # keep the half that still brackets the sign change; for a
        # decreasing crossing this drops the left half when S(mid) > 0
        if (s > 0) == left_positive:
            a = mid
        else:
            b = mid
    return 0.5 * (a + b)


def plain_bisection(s_fn: SkepticFunction, iters: int = 10) -> float:
    """Bisection on [0, 1] without endpoint tests or tolerance.

    Drops the left half of the interval when S(mid) > 0 and the right half
    otherwise, then returns the midpoint of what is left. This converges to
    a crossing from positive to negative values, and to an endpoint when S
    keeps one sign. Because the endpoints are never tested, the no-gain
    guarantee holds only up to |S| at the returned point.
    """
    a, b = 0.0, 1.0
    for _ in range(iters):
        mid = 0.5 * (a + b)
        if _finite(s_fn(mid), mid) > 0:
            a = mid
        else:
            b = mid
    return 0.5 * (a + b)


def k29_score_fn(history: History, x_now, kernel: KernelSpec) -> SkepticFunction:
    """S(p) = sum_i K((p, x_now), (p_i, x_i)) (y_i - p_i) over the history."""
    ps = history.p
    resid = history.y - ps
    kx = object_kernel_values(x_now, history.x, kernel)
    sigma = kernel.sigma
    if kernel.combine == "product":
        w = kx * resid
        keep = w != 0.0
        ps_k, w_k = ps[keep], w[keep]

        def fn(p):
            p = np.asarray(p, dtype=float)
            kp = gaussian_forecast_kernel(p[..., None], ps_k, sigma)
            return kp @ w_k
    else:
        offset = float(kx @ resid)

        def fn(p):
            p = np.asarray(p, dtype=float)
            kp = gaussian_forecast_kernel(p[..., None], ps, sigma)
            return kp @ resid + offset

    return SkepticFunction(fn, vectorized=True)


def k29_forecast(history: History, x_now, cfg: K29Config = K29Config()) -> float:
    return defensive_choose(k29_score_fn(history, x_now, cfg.kernel), cfg.solver)


def laplace_forecast(history: History) -> float:
    """Rule of succession (k + 1) / (n + 1) at round n = len(history) + 1."""
    n = len(history) + 1
    k = int(np.count_nonzero(history.y == 1))
    return (k + 1) / (n + 1)


def sign_limit_forecast(history: History) -> float:
    """1, 0 or 0.5 as the cumulative residual sum is positive, negative or zero."""
    total = float(np.sum(history.y - history.p))
    if total > 0:
        return 1.0
    if total < 0:
        return 0.0
    return 0.5


# -- strategy objects for the game engine ----------------------------------

class K29Forecaster:
    def __init__(self, cfg: K29Config = K29Config()):
        self.cfg = cfg

    def forecast(self, history, x, s_fn=None):
        return k29_forecast(history, x, self.cfg)


class DefensiveForecaster:
    """Defends against whatever function the designated Skeptic announces."""

    def __init__(self, solver: RootSolverConfig = RootSolverConfig()):
        self.solver = solver

    def forecast(self, history, x, s_fn=None):
        if s_fn is None:
            raise ValueError("a defensive forecaster needs a designated Skeptic")
        return defensive_choose(s_fn, self.solver)


class LaplaceForecaster:
    def forecast(self, history, x, s_fn=None):
        return laplace_forecast(history)


class SignLimitForecaster:
    def forecast(self, history, x, s_fn=None):
        return sign_limit_forecast(history)


class ConstantForecaster:
    def __init__(self, value: float = 0.5):
        self.value = float(value)

    def forecast(self, history, x, s_fn=None):
        return self.value
