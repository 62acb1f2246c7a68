"""Online forecaster: roots the betting function on the lexicographic square.

Each round the betting function S reduces, at fixed p, to a quadratic in
the exposure variable e over the optimal face's exposure interval:

    S(p, e) = (1 - 2p)/2 * e^2 + A*e + B + C*p

with A the running sum of exposure-weighted residuals and B, C determined
by the kernel column at the new datum.  Stage 1 scans a p-grid recording
the value range of the quadratic over each face; stage 2 bisects to the
first p, in lexicographic order, whose range brackets zero; stage 3 solves
the quadratic in e analytically and maps e back to the tie-breaker q.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from defcast.games import DomainError, DomainTag, Forecast, Game
from defcast.kernels import Kernel, KernelExpansion, KernelKind

DEFAULT_EPSILON_ROOT = 1e-9
DEFAULT_P_GRID = 1024

# stripped-domain bracketing starts here and halves until a sign change
# is bracketed; exposure diverges at the stripped edges, so this terminates
_DELTA_START = 1e-6
_DELTA_MIN = 1e-15


class RootFinderError(RuntimeError):
    """The bracket cascade failed; unreachable for the built-in games."""


class Branch(Enum):
    ROOT = "root"
    ENDPOINT_POSITIVE = "endpoint_positive"
    ENDPOINT_NEGATIVE = "endpoint_negative"


@dataclass(frozen=True)
class RootReport:
    forecast: Forecast
    s_residual: float
    branch: Branch


class Forecaster:
    """State of one online forecasting sequence (single-writer)."""

    def __init__(self, game: Game, kernel: Kernel,
                 epsilon_root: float = DEFAULT_EPSILON_ROOT,
                 p_grid_size: int = DEFAULT_P_GRID):
        self.game = game
        self.kernel = kernel
        self.epsilon_root = float(epsilon_root)
        self.p_grid_size = int(p_grid_size)
        self.xs: list = []
        self.ps: list[float] = []
        self.qs: list[float] = []
        self.ys: list[int] = []
        self.es: list[float] = []
        self.s_residuals: list[float] = []
        self.branches: list[Branch] = []
        self.agg_a = 0.0  # running sum of e_i * (y_i - p_i)

    @property
    def round(self) -> int:
        return len(self.ys)

    @property
    def residual_total(self) -> float:
        return float(sum(abs(r) for r in self.s_residuals))

    # -- kernel sums ------------------------------------------------------

    def _kernel_row(self, x) -> np.ndarray:
        if not self.xs:
            return np.zeros(0)
        if self.kernel.kind is KernelKind.CUSTOM:
            return np.array([float(self.kernel(x, xi)) for xi in self.xs])
        return np.asarray(self.kernel(x, np.asarray(self.xs, dtype=float)))

    def coefficients(self, x) -> tuple[float, float, float]:
        """(A, B, C) of the quadratic-in-e form of S at datum x."""
        kxx = float(self.kernel.diag(x))
        resid = np.asarray(self.ys, dtype=float) - np.asarray(self.ps)
        b = float(self._kernel_row(x) @ resid) + 0.5 * kxx
        return self.agg_a, b, -kxx

    def s_value(self, p: float, q: float, x) -> float:
        """Betting function at (p, q, x), by direct summation over history."""
        d = self.game.canonical_choice(Forecast(p, q))
        e = d.exposure
        kxx = float(self.kernel.diag(x))
        total = 0.5 * (e * e + kxx) * (1.0 - 2.0 * p)
        if self.xs:
            resid = np.asarray(self.ys, dtype=float) - np.asarray(self.ps)
            terms = (e * np.asarray(self.es) + self._kernel_row(x)) * resid
            total += float(terms.sum())
        return total

    # -- root finding -----------------------------------------------------

    def _p_grid(self, delta: float) -> np.ndarray:
        n = max(self.p_grid_size, 8)
        tag = self.game.domain_tag
        if tag is DomainTag.FULL_SQUARE:
            grid = np.linspace(0.0, 1.0, n)
        elif tag is DomainTag.STRIPPED_BOTH:
            half = np.geomspace(delta, 0.5, n // 2)
            grid = np.concatenate([half, 1.0 - half[::-1][1:]])
        elif tag is DomainTag.STRIPPED_LEFT:
            grid = np.concatenate([np.geomspace(delta, 0.5, n // 2),
                                   np.linspace(0.5, 1.0, n // 2)[1:]])
        else:  # STRIPPED_RIGHT
            half = np.geomspace(delta, 0.5, n // 2)
            grid = np.concatenate([np.linspace(0.0, 0.5, n // 2),
                                   (1.0 - half)[::-1][1:]])
        specials = [p for p in self.game.special_ps()
                    if grid[0] <= p <= grid[-1]]
        if specials:
            grid = np.unique(np.concatenate([grid, np.array(specials)]))
        return grid

    @staticmethod
    def _range(a, A, c, e_hi, e_lo):
        """Min and max of a*e^2 + A*e + c over [e_lo, e_hi] (vectorized)."""
        v1 = a * e_hi * e_hi + A * e_hi + c
        v2 = a * e_lo * e_lo + A * e_lo + c
        lo = np.minimum(v1, v2)
        hi = np.maximum(v1, v2)
        with np.errstate(divide="ignore", invalid="ignore"):
            ev = np.where(a != 0.0, -A / (2.0 * np.where(a == 0.0, 1.0, a)),
                          np.nan)
        inside = (e_hi > e_lo) & np.isfinite(ev) & (ev > e_lo) & (ev < e_hi)
        if np.any(inside):
            vv = a * ev * ev + A * ev + c
            lo = np.where(inside, np.minimum(lo, vv), lo)
            hi = np.where(inside, np.maximum(hi, vv), hi)
        return lo, hi

    def _ranges_on(self, ps: np.ndarray, A: float, B: float, C: float):
        e_hi, e_lo = self.game.exposure_interval_arrays(ps)
        a = 0.5 * (1.0 - 2.0 * ps)
        c = B + C * ps
        return self._range(a, A, c, e_hi, e_lo)

    @staticmethod
    def _sgn(lo, hi):
        return np.where(lo > 0.0, 1, np.where(hi < 0.0, -1, 0))

    def next_forecast(self, x) -> RootReport:
        """Forecast for datum x: a root of S, or the endpoint rule."""
        A, B, C = self.coefficients(x)
        tag = self.game.domain_tag
        delta = _DELTA_START
        while True:
            grid = self._p_grid(delta)
            lo, hi = self._ranges_on(grid, A, B, C)
            sgn = self._sgn(lo, hi)
            s0 = int(sgn[0])
            if s0 == 0:
                return self._solve_at(float(grid[0]), A, B, C)
            flips = np.nonzero(sgn != s0)[0]
            if flips.size:
                i = int(flips[0])
                if sgn[i] == 0:
                    return self._solve_at(float(grid[i]), A, B, C)
                return self._bisect(float(grid[i - 1]), float(grid[i]),
                                    s0, A, B, C)
            # no sign change visible on this grid
            if tag is DomainTag.FULL_SQUARE:
                return self._endpoint(s0)
            if tag is DomainTag.STRIPPED_LEFT and s0 > 0:
                return self._endpoint(1)
            if tag is DomainTag.STRIPPED_RIGHT and s0 < 0:
                return self._endpoint(-1)
            delta *= 0.5
            if delta < _DELTA_MIN:
                raise RootFinderError(
                    f"no bracket found down to delta={_DELTA_MIN} "
                    f"(A={A}, B={B}, C={C}, sign={s0})")

    def _endpoint(self, s: int) -> RootReport:
        p = (1.0 + s) / 2.0
        branch = Branch.ENDPOINT_POSITIVE if s > 0 else Branch.ENDPOINT_NEGATIVE
        return RootReport(Forecast(p, 0.5), 0.0, branch)

    def _bisect(self, pa: float, pb: float, s0: int,
                A: float, B: float, C: float) -> RootReport:
        # pa and pb are adjacent grid points; no non-singleton face sits
        # strictly between them, so S is continuous in p on (pa, pb)
        for _ in range(200):
            pm = 0.5 * (pa + pb)
            if pm <= pa or pm >= pb:
                break
            lo, hi = self._ranges_on(np.array([pm]), A, B, C)
            s = int(self._sgn(lo, hi)[0])
            if s == 0:
                return self._solve_at(pm, A, B, C)
            if s == s0:
                pa = pm
            else:
                pb = pm
        best = None
        for p in (pa, pb):
            rep = self._solve_at(p, A, B, C)
            if best is None or rep.s_residual < best.s_residual:
                best = rep
        return best

    def _solve_at(self, p: float, A: float, B: float, C: float) -> RootReport:
        """Solve the quadratic in e at fixed p; map e to the tie-breaker q."""
        e_hi, e_lo = self.game.exposure_interval(p)
        a = 0.5 * (1.0 - 2.0 * p)
        c = B + C * p

        def phi(e):
            return a * e * e + A * e + c

        if e_hi == e_lo:
            return RootReport(Forecast(p, 0.5), abs(phi(e_hi)), Branch.ROOT)

        tiny = 1e-14 * (1.0 + abs(A) + abs(c))
        if abs(a) * max(abs(e_hi), abs(e_lo)) ** 2 < tiny and abs(A) * max(
                abs(e_hi), abs(e_lo)) < tiny:
            # S is flat in q along this face; tie-break at q = 1/2
            e_mid = 0.5 * (e_hi + e_lo)
            return RootReport(Forecast(p, 0.5), abs(phi(e_mid)), Branch.ROOT)

        roots: list[float] = []
        if abs(a) < 1e-300:
            if A != 0.0:
                roots.append(-c / A)
        else:
            disc = A * A - 4.0 * a * c
            if disc >= 0.0:
                sq = math.sqrt(disc)
                if A >= 0.0:
                    r1 = (-A - sq) / (2.0 * a)
                else:
                    r1 = (-A + sq) / (2.0 * a)
                roots.append(r1)
                if r1 != 0.0:
                    roots.append(c / (a * r1))
                else:
                    roots.append(-A / a)
        span = e_hi - e_lo
        tol = 1e-9 * (1.0 + abs(span))
        feasible = [min(max(r, e_lo), e_hi) for r in roots
                    if e_lo - tol <= r <= e_hi + tol]
        if feasible:
            e = max(feasible)  # largest e == lexicographically smallest q
        else:
            e = min((e_hi, e_lo), key=lambda v: abs(phi(v)))
        q = (e_hi - e) / span
        q = min(max(q, 0.0), 1.0)
        return RootReport(Forecast(p, q), abs(phi(e)), Branch.ROOT)

    # -- protocol hooks ---------------------------------------------------

    def update(self, x, forecast: Forecast, y: int,
               s_residual: float = 0.0, branch: Branch = Branch.ROOT) -> None:
        """Append a completed round to the history."""
        if y not in (0, 1):
            raise DomainError(f"observation must be binary, got {y}")
        d = self.game.canonical_choice(forecast)
        self.xs.append(x)
        self.ps.append(forecast.p)
        self.qs.append(forecast.q)
        self.ys.append(int(y))
        self.es.append(d.exposure)
        self.s_residuals.append(float(s_residual))
        self.branches.append(branch)
        self.agg_a += d.exposure * (y - forecast.p)

    # -- certificates -----------------------------------------------------

    def k29_certificate(self) -> tuple[float, float]:
        """Large-number certificate under the merged kernel.

        lhs is the squared norm of the residual-weighted feature sum; rhs
        the accumulated variance term.  lhs <= rhs + 2*sum|s_residual|.
        """
        if not self.ys:
            return 0.0, 0.0
        resid = np.asarray(self.ys, dtype=float) - np.asarray(self.ps)
        es = np.asarray(self.es)
        gram = self.kernel.gram(self.xs)
        lhs = float(es @ resid) ** 2 + float(resid @ gram @ resid)
        ps = np.asarray(self.ps)
        rhs = float(np.sum(ps * (1.0 - ps) * (es * es + np.diag(gram))))
        return lhs, rhs

    def resolution_certificate(self, f: KernelExpansion) -> tuple[float, float]:
        """Resolution certificate for a data-space function f."""
        if f.kernel != self.kernel:
            raise DomainError("expansion uses a different kernel")
        if not self.ys:
            return 0.0, 0.0
        resid = np.asarray(self.ys, dtype=float) - np.asarray(self.ps)
        fx = np.array([float(f(xi)) for xi in self.xs])
        lhs = abs(float(resid @ fx))
        ps = np.asarray(self.ps)
        es = np.asarray(self.es)
        diag = np.array([float(self.kernel.diag(xi)) for xi in self.xs])
        bound = f.norm() * math.sqrt(
            float(np.sum(ps * (1.0 - ps) * (es * es + diag))))
        return lhs, bound
