"""Independent reference computations.

Plain-Python loops transcribing the formulas term by term; nothing here
imports from the package, so the checks stay independent of the code paths
they test.
"""

import math


def product_capital(eps, ps, ys, weights=None):
    k = 1.0
    for i, (p, y) in enumerate(zip(ps, ys)):
        w = 1.0 if weights is None else weights[i]
        k *= 1.0 + eps * w * (y - p)
    return k


def bump(p, c, w):
    return math.exp(-((p - c) ** 2) / (2.0 * w * w))


def test_fn_value(p, eps, c, w, ps, ys):
    """eps * I(p) * prod(1 + eps I(p_i) (y_i - p_i)) with a Gaussian bump I."""
    return eps * bump(p, c, w) * product_capital(eps, ps, ys, [bump(q, c, w) for q in ps])


def k29_sum(p, ps, ys, sigma, x_now=None, xs=None, gamma=None):
    total = 0.0
    for i, (q, y) in enumerate(zip(ps, ys)):
        k = math.exp(-((p - q) ** 2) / (4.0 * sigma * sigma))
        if gamma is not None:
            d2 = sum((a - b) ** 2 for a, b in zip(x_now, xs[i]))
            k *= math.exp(-d2 / (4.0 * gamma * gamma))
        total += k * (y - q)
    return total


def dense_grid_root(f, n=10**6):
    """Location of the first sign change of ``f`` on an n-point grid over [0, 1].

    ``f`` must accept a list of floats and return a list.
    """
    step = 1.0 / (n - 1)
    chunk = 10**5
    prev_x = prev_v = None
    for start in range(0, n, chunk):
        xs = [min(1.0, (start + j) * step) for j in range(min(chunk, n - start))]
        vs = f(xs)
        for x, v in zip(xs, vs):
            if v == 0.0:
                return x
            if prev_v is not None and (prev_v > 0) != (v > 0):
                return 0.5 * (prev_x + x)
            prev_x, prev_v = x, v
    return None


def running_means(ps, ys):
    out = []
    s = 0.0
    for i, (p, y) in enumerate(zip(ps, ys), 1):
        s += y - p
        out.append(s / i)
    return out
