"""Forecast-continuous Mercer kernels on [0, 1] and on ([0, 1] x X)^2.

Both factors use the ``exp(-d^2 / (4 s^2))`` parameterization, where ``d``
is the forecast difference (or Euclidean object distance) and ``s`` the
bandwidth. The usual RBF form with ``2 s^2`` is the same family with a
rescaled bandwidth.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

OBJECT_KERNELS = ("none", "gaussian")
COMBINATIONS = ("product", "sum")


@dataclass(frozen=True)
class KernelSpec:
    sigma: float
    object_kernel: str = "none"
    gamma: float | None = None
    combine: str = "product"

    def __post_init__(self):
        if not self.sigma > 0:
            raise ValueError(f"forecast bandwidth sigma must be > 0, got {self.sigma!r}")
        if self.object_kernel not in OBJECT_KERNELS:
            raise ValueError(f"object_kernel must be one of {OBJECT_KERNELS}")
        if self.combine not in COMBINATIONS:
            raise ValueError(f"combine must be one of {COMBINATIONS}")
        if self.object_kernel == "gaussian" and not (self.gamma is not None and self.gamma > 0):
            raise ValueError(f"object bandwidth gamma must be > 0, got {self.gamma!r}")

    @property
    def lipschitz(self) -> float:
        """Bound on |dK_p/dp| for the forecast factor."""
        return 1.0 / (self.sigma * math.sqrt(2 * math.e))


def gaussian_forecast_kernel(p, q, sigma: float):
    """exp(-(p - q)^2 / (4 sigma^2)); broadcasts over numpy arrays."""
    d = np.subtract(p, q)
    return np.exp(-(d * d) / (4.0 * sigma * sigma))


def object_kernel_values(x, xs, spec: KernelSpec) -> np.ndarray:
    """Object factor K_x(x, xs[i]) for every row of ``xs``.

    Returns ones (product mode) or zeros (sum mode) when there is no
    object kernel, so callers can combine factors uniformly.
    """
    xs = np.asarray(xs, dtype=float)
    x = np.asarray(x, dtype=float).reshape(-1)
    if xs.ndim != 2 or xs.shape[1] != x.shape[0]:
        raise ValueError(f"object dimension mismatch: {x.shape[0]} vs array of shape {xs.shape}")
    if spec.object_kernel == "none":
        fill = 1.0 if spec.combine == "product" else 0.0
        return np.full(xs.shape[0], fill)
    d2 = np.sum((xs - x) ** 2, axis=1)
    return np.exp(-d2 / (4.0 * spec.gamma * spec.gamma))


def combine(kp, kx, spec: KernelSpec):
    return kp * kx if spec.combine == "product" else kp + kx


def joint_kernel(a, b, spec: KernelSpec) -> float:
    """Kernel on ([0, 1] x X)^2 between ``a = (p_a, x_a)`` and ``b = (p_b, x_b)``."""
    (pa, xa), (pb, xb) = a, b
    xa = np.asarray(xa, dtype=float).reshape(-1)
    xb = np.asarray(xb, dtype=float).reshape(-1)
    if xa.shape != xb.shape:
        raise ValueError(f"object dimension mismatch: {xa.shape[0]} vs {xb.shape[0]}")
    kp = float(gaussian_forecast_kernel(pa, pb, spec.sigma))
    kx = float(object_kernel_values(xa, xb.reshape(1, -1), spec)[0])
    return combine(kp, kx, spec)


def gram_matrix(points, spec: KernelSpec) -> np.ndarray:
    """Gram matrix of ``joint_kernel`` over a list of (p, x) points."""
    n = len(points)
    g = np.empty((n, n))
    for i in range(n):
        for j in range(i, n):
            g[i, j] = g[j, i] = joint_kernel(points[i], points[j], spec)
    return g
