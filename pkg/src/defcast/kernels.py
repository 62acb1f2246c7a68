"""Kernels on the data space, Gram matrices, and finite-expansion norms.

Built-in kernels live on the real line; custom kernels take opaque points
(anything their evaluator accepts).  Hilbert-space norms are computed
through kernel sums only; feature maps are never materialized.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import Callable

import numpy as np

# Quadratic forms below this are treated as broken kernels, not noise.
PSD_TOL = -1e-8


class KernelError(ValueError):
    """Broken kernel: negative quadratic form or missing data range."""


class KernelKind(Enum):
    SOBOLEV = "sobolev"
    GAUSSIAN = "gaussian"
    LINEAR = "linear"
    CUSTOM = "custom"


@dataclass(frozen=True)
class Kernel:
    """Symmetric positive-definite function on the data space.

    `data_range` declares a compact |x| <= r on which the diagonal sup is
    taken for kernels whose diagonal is unbounded on the whole line.
    """

    kind: KernelKind
    width: float = 1.0
    offset: float = 0.0
    func: Callable | None = None
    data_range: float | None = None

    @staticmethod
    def sobolev() -> "Kernel":
        return Kernel(KernelKind.SOBOLEV)

    @staticmethod
    def gaussian(width: float) -> "Kernel":
        if width <= 0:
            raise KernelError("gaussian width must be positive")
        return Kernel(KernelKind.GAUSSIAN, width=width)

    @staticmethod
    def linear(offset: float = 0.0, data_range: float | None = None) -> "Kernel":
        if offset < 0:
            raise KernelError("linear offset must be nonnegative")
        return Kernel(KernelKind.LINEAR, offset=offset, data_range=data_range)

    @staticmethod
    def custom(func: Callable, data_range: float | None = None) -> "Kernel":
        return Kernel(KernelKind.CUSTOM, func=func, data_range=data_range)

    @staticmethod
    def from_json(doc) -> "Kernel":
        kind = doc["kind"]
        if kind == "sobolev":
            return Kernel.sobolev()
        if kind == "gaussian":
            return Kernel.gaussian(float(doc.get("width", 1.0)))
        if kind == "linear":
            rng = doc.get("range")
            return Kernel.linear(float(doc.get("offset", 0.0)),
                                 None if rng is None else float(rng))
        raise KernelError(f"unknown kernel {kind!r}")

    # -- evaluation -------------------------------------------------------

    def __call__(self, x, x2):
        """K(x, x'); broadcasts over numpy arrays for built-ins."""
        if self.kind is KernelKind.SOBOLEV:
            return 0.5 * np.exp(-np.abs(np.subtract(x, x2)))
        if self.kind is KernelKind.GAUSSIAN:
            d = np.subtract(x, x2)
            return np.exp(-d * d / (2.0 * self.width ** 2))
        if self.kind is KernelKind.LINEAR:
            return np.multiply(x, x2) + self.offset
        return self.func(x, x2)

    def diag(self, x):
        return self(x, x)

    def c_f(self) -> float:
        """Sup over the data space of sqrt(K(x, x))."""
        if self.kind is KernelKind.SOBOLEV:
            return 1.0 / math.sqrt(2.0)
        if self.kind is KernelKind.GAUSSIAN:
            return 1.0
        if self.data_range is None:
            return math.inf  # unbounded diagonal, no declared compact range
        r = float(self.data_range)
        grid = np.linspace(-r, r, 10_000)
        diag = np.array([float(self.diag(x)) for x in grid]) \
            if self.kind is KernelKind.CUSTOM else np.asarray(self.diag(grid))
        best = int(np.argmax(diag))
        lo = grid[max(best - 1, 0)]
        hi = grid[min(best + 1, len(grid) - 1)]
        fine = np.linspace(lo, hi, 1_000)
        vals = np.array([float(self.diag(x)) for x in fine]) \
            if self.kind is KernelKind.CUSTOM else np.asarray(self.diag(fine))
        return math.sqrt(max(float(diag[best]), float(vals.max())))

    def gram(self, points) -> np.ndarray:
        """Gram matrix of a nonempty point list."""
        pts = list(points)
        if not pts:
            raise KernelError("gram needs at least one point")
        if self.kind is KernelKind.CUSTOM:
            n = len(pts)
            g = np.empty((n, n))
            for i in range(n):
                for j in range(i, n):
                    g[i, j] = g[j, i] = float(self.func(pts[i], pts[j]))
            return g
        xs = np.asarray(pts, dtype=float)
        return np.asarray(self(xs[:, None], xs[None, :]))


@dataclass(frozen=True)
class KernelExpansion:
    """Finite kernel expansion sum_i w_i K(z_i, .) in the kernel's RKHS."""

    centers: tuple
    weights: tuple
    kernel: Kernel

    @staticmethod
    def build(centers, weights, kernel: Kernel) -> "KernelExpansion":
        centers = tuple(centers)
        weights = tuple(float(w) for w in weights)
        if len(centers) != len(weights):
            raise KernelError("centers and weights must have equal length")
        return KernelExpansion(centers, weights, kernel)

    @staticmethod
    def zero(kernel: Kernel) -> "KernelExpansion":
        return KernelExpansion((), (), kernel)

    @staticmethod
    def from_json(doc, kernel: Kernel) -> "KernelExpansion":
        return KernelExpansion.build(doc["centers"], doc["weights"], kernel)

    def __call__(self, x):
        """Evaluate at x; broadcasts over arrays for built-in kernels."""
        if not self.centers:
            return np.zeros_like(np.asarray(x, dtype=float)) \
                if np.ndim(x) else 0.0
        w = np.asarray(self.weights)
        if self.kernel.kind is KernelKind.CUSTOM:
            return float(sum(wi * float(self.kernel.func(zi, x))
                             for wi, zi in zip(w, self.centers)))
        zs = np.asarray(self.centers, dtype=float)
        xs = np.asarray(x, dtype=float)
        vals = self.kernel(zs, xs[..., None]) @ w
        return float(vals) if np.ndim(x) == 0 else vals

    def norm(self) -> float:
        """RKHS norm sqrt(w' G w) of the expansion."""
        if not self.centers:
            return 0.0
        w = np.asarray(self.weights)
        g = self.kernel.gram(self.centers)
        quad = float(w @ g @ w)
        if quad < PSD_TOL:
            raise KernelError(
                f"negative quadratic form {quad}: kernel is not PSD")
        return math.sqrt(max(quad, 0.0))
