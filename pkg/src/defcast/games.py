"""Binary-outcome loss games and their canonical choice functions.

A game is summarized by the southwest boundary of its superdecision set.
Forecasts are points (p, q) of the lexicographic square; the canonical
choice function maps them to expected-loss-minimizing decisions, with q
selecting a point within the optimal face when it is not a singleton.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from enum import Enum

import numpy as np
from scipy.optimize import minimize_scalar

# Log-loss decisions are clamped at evaluation time so losses stay finite
# in floating point; the decision set (0, 1) is open.
LOG_CLAMP = 1e-12

# p-grid size for the numeric sup defining the game/kernel constant.
_CLAMBDA_GRID = 4096


class DomainError(ValueError):
    """Input outside the decision set or the choice-function domain."""


class GameKind(Enum):
    SQUARE = "square"
    ABSOLUTE = "absolute"
    LOG = "log"
    CUSTOM = "custom"


class DomainTag(Enum):
    """Domain of the canonical choice function in the p coordinate."""

    FULL_SQUARE = "full"          # p in [0, 1]
    STRIPPED_BOTH = "stripped"    # p in (0, 1)
    STRIPPED_LEFT = "stripped_left"    # p in (0, 1]
    STRIPPED_RIGHT = "stripped_right"  # p in [0, 1)


@dataclass(frozen=True)
class Decision:
    """A decision together with its loss pair (loss on y=0, loss on y=1)."""

    gamma: float
    loss0: float
    loss1: float

    @property
    def exposure(self) -> float:
        return self.loss1 - self.loss0


@dataclass(frozen=True)
class Forecast:
    """A point of the lexicographic square: probability p plus tie-breaker q."""

    p: float
    q: float


@dataclass(frozen=True)
class Game:
    """A binary-outcome game: loss function, decision set, choice domain.

    For CUSTOM games the southwest boundary is a finite polyline of loss
    pairs, strictly increasing in loss0 and strictly decreasing in loss1,
    with monotone supporting-line slopes (convexity).  Decisions of a
    custom game are parametrized by t in [0, m-1]: vertex i at t = i,
    linear interpolation of the loss pair in between.
    """

    kind: GameKind
    decision_description: str
    c0: float
    c1: float
    domain_tag: DomainTag
    boundary: tuple[tuple[float, float], ...] | None = None

    # -- constructors -----------------------------------------------------

    @staticmethod
    def square() -> "Game":
        return Game(GameKind.SQUARE, "gamma in [0,1]", 0.0, 0.0,
                    DomainTag.FULL_SQUARE)

    @staticmethod
    def absolute() -> "Game":
        return Game(GameKind.ABSOLUTE, "gamma in [0,1]", 0.0, 0.0,
                    DomainTag.FULL_SQUARE)

    @staticmethod
    def log() -> "Game":
        return Game(GameKind.LOG, "gamma in (0,1)", 0.0, 0.0,
                    DomainTag.STRIPPED_BOTH)

    @staticmethod
    def custom(boundary) -> "Game":
        pts = tuple((float(a), float(b)) for a, b in boundary)
        if len(pts) < 1:
            raise DomainError("custom boundary needs at least one point")
        for (a0, b0), (a1, b1) in zip(pts, pts[1:]):
            if not (a1 > a0 and b1 < b0):
                raise DomainError(
                    "boundary must be strictly increasing in loss0 and "
                    "strictly decreasing in loss1")
        slopes = [(b1 - b0) / (a1 - a0)
                  for (a0, b0), (a1, b1) in zip(pts, pts[1:])]
        for s0, s1 in zip(slopes, slopes[1:]):
            if s1 < s0 - 1e-12:
                raise DomainError("boundary is not convex (slopes decrease)")
        c0 = pts[0][0]
        c1 = pts[-1][1]
        return Game(GameKind.CUSTOM, "polyline parameter t in [0, m-1]",
                    c0, c1, DomainTag.FULL_SQUARE, boundary=pts)

    @staticmethod
    def from_name(name: str) -> "Game":
        try:
            kind = GameKind(name)
        except ValueError:
            raise DomainError(f"unknown game {name!r}") from None
        if kind is GameKind.CUSTOM:
            raise DomainError("custom games need an explicit boundary")
        return {GameKind.SQUARE: Game.square,
                GameKind.ABSOLUTE: Game.absolute,
                GameKind.LOG: Game.log}[kind]()

    @staticmethod
    def from_json(doc) -> "Game":
        """Build a game from a JSON document or an already-parsed object."""
        if isinstance(doc, str):
            try:
                doc = json.loads(doc)
            except json.JSONDecodeError:
                return Game.from_name(doc)
        if isinstance(doc, dict):
            if doc.get("kind") == "custom":
                return Game.custom(doc["boundary"])
            return Game.from_name(doc["kind"])
        return Game.from_name(doc)

    # -- loss and exposure ------------------------------------------------

    def _check_gamma(self, gamma: float) -> None:
        if self.kind in (GameKind.SQUARE, GameKind.ABSOLUTE):
            if not 0.0 <= gamma <= 1.0:
                raise DomainError(f"gamma={gamma} outside [0,1]")
        elif self.kind is GameKind.LOG:
            if not 0.0 < gamma < 1.0:
                raise DomainError(f"gamma={gamma} outside (0,1)")
        else:
            if not 0.0 <= gamma <= len(self.boundary) - 1:
                raise DomainError(f"boundary parameter {gamma} out of range")

    def _boundary_pair(self, t: float) -> tuple[float, float]:
        pts = self.boundary
        i = min(int(math.floor(t)), len(pts) - 2) if len(pts) > 1 else 0
        if len(pts) == 1:
            return pts[0]
        frac = t - i
        a0, b0 = pts[i]
        a1, b1 = pts[i + 1]
        return a0 + frac * (a1 - a0), b0 + frac * (b1 - b0)

    def loss(self, y: int, gamma: float) -> float:
        """Loss of decision gamma on outcome y."""
        self._check_gamma(gamma)
        if self.kind is GameKind.SQUARE:
            return (y - gamma) ** 2
        if self.kind is GameKind.ABSOLUTE:
            return abs(y - gamma)
        if self.kind is GameKind.LOG:
            g = min(max(gamma, LOG_CLAMP), 1.0 - LOG_CLAMP)
            return -math.log(g) if y else -math.log1p(-g)
        a, b = self._boundary_pair(gamma)
        return b if y else a

    def expected_loss(self, p: float, gamma: float) -> float:
        """Expected loss of gamma when the probability of outcome 1 is p."""
        if not 0.0 <= p <= 1.0:
            raise DomainError(f"p={p} outside [0,1]")
        return p * self.loss(1, gamma) + (1.0 - p) * self.loss(0, gamma)

    def exposure(self, gamma: float) -> float:
        """Sensitivity of the decision's loss to the outcome: loss1 - loss0."""
        self._check_gamma(gamma)
        if self.kind in (GameKind.SQUARE, GameKind.ABSOLUTE):
            return 1.0 - 2.0 * gamma
        if self.kind is GameKind.LOG:
            return math.log((1.0 - gamma) / gamma)
        a, b = self._boundary_pair(gamma)
        return b - a

    # -- choice function --------------------------------------------------

    def check_forecast(self, f: Forecast) -> None:
        p, q = f.p, f.q
        if not (0.0 <= q <= 1.0):
            raise DomainError(f"q={q} outside [0,1]")
        lo_ok = p > 0.0 if self.domain_tag in (
            DomainTag.STRIPPED_BOTH, DomainTag.STRIPPED_LEFT) else p >= 0.0
        hi_ok = p < 1.0 if self.domain_tag in (
            DomainTag.STRIPPED_BOTH, DomainTag.STRIPPED_RIGHT) else p <= 1.0
        if not (lo_ok and hi_ok):
            raise DomainError(
                f"p={p} outside the {self.domain_tag.value} domain")

    def _custom_face(self, p: float) -> tuple[int, int]:
        """Indices of the first and last boundary vertices supporting p."""
        pts = self.boundary
        if p <= 0.0:
            return 0, 0
        if p >= 1.0:
            return len(pts) - 1, len(pts) - 1
        scores = [(1.0 - p) * a + p * b for a, b in pts]
        best = min(scores)
        tol = 1e-12 * (1.0 + abs(best))
        idx = [i for i, s in enumerate(scores) if s <= best + tol]
        return idx[0], idx[-1]

    def canonical_choice(self, f: Forecast) -> Decision:
        """Map a forecast to an expected-loss-minimizing decision.

        The loss pair of the result is (1-q) A(p) + q B(p), where [A, B]
        is the optimal face at p and A is northwest of B.
        """
        self.check_forecast(f)
        p, q = f.p, f.q
        if self.kind in (GameKind.SQUARE, GameKind.LOG):
            # proper scoring rules: the optimal decision is p itself
            return Decision(p, self.loss(0, p), self.loss(1, p))
        if self.kind is GameKind.ABSOLUTE:
            if p < 0.5:
                gamma = 0.0
            elif p > 0.5:
                gamma = 1.0
            else:
                gamma = q
            return Decision(gamma, gamma, 1.0 - gamma)
        i, j = self._custom_face(p)
        t = i + q * (j - i)
        a, b = self._boundary_pair(t)
        return Decision(t, a, b)

    def exposure_interval(self, p: float) -> tuple[float, float]:
        """Exposure endpoints (at A(p), at B(p)) of the optimal face at p."""
        if self.kind is GameKind.SQUARE:
            self.check_forecast(Forecast(p, 0.0))
            e = 1.0 - 2.0 * p
            return e, e
        if self.kind is GameKind.LOG:
            self.check_forecast(Forecast(p, 0.0))
            e = math.log((1.0 - p) / p)
            return e, e
        if self.kind is GameKind.ABSOLUTE:
            self.check_forecast(Forecast(p, 0.0))
            if p < 0.5:
                return 1.0, 1.0
            if p > 0.5:
                return -1.0, -1.0
            return 1.0, -1.0
        self.check_forecast(Forecast(p, 0.0))
        i, j = self._custom_face(p)
        a0, b0 = self.boundary[i]
        a1, b1 = self.boundary[j]
        return b0 - a0, b1 - a1

    def exposure_interval_arrays(self, ps: np.ndarray):
        """Vectorized exposure_interval over an array of p values."""
        if self.kind is GameKind.SQUARE:
            e = 1.0 - 2.0 * ps
            return e, e.copy()
        if self.kind is GameKind.LOG:
            e = np.log((1.0 - ps) / ps)
            return e, e.copy()
        if self.kind is GameKind.ABSOLUTE:
            e_hi = np.where(ps > 0.5, -1.0, 1.0)
            e_lo = np.where(ps < 0.5, 1.0, -1.0)
            return e_hi, e_lo
        pairs = [self.exposure_interval(p) for p in ps]
        arr = np.asarray(pairs)
        return arr[:, 0], arr[:, 1]

    def special_ps(self) -> list[float]:
        """Forecast probabilities whose optimal face is not a singleton."""
        if self.kind is GameKind.ABSOLUTE:
            return [0.5]
        if self.kind is GameKind.CUSTOM and len(self.boundary) > 1:
            out = []
            for (a0, b0), (a1, b1) in zip(self.boundary, self.boundary[1:]):
                s = (b1 - b0) / (a1 - a0)
                p = 1.0 / (1.0 - s)
                if 0.0 < p < 1.0:
                    out.append(p)
            return sorted(set(out))
        return []

    # -- inverse exposure -------------------------------------------------

    def decision_from_exposure(self, e: float) -> float:
        """Decision whose exposure is e (inverse of the exposure map)."""
        if self.kind in (GameKind.SQUARE, GameKind.ABSOLUTE):
            if not -1.0 <= e <= 1.0:
                raise DomainError(f"exposure {e} outside [-1,1]")
            return (1.0 - e) / 2.0
        if self.kind is GameKind.LOG:
            if e >= 0:
                g = math.exp(-e) / (1.0 + math.exp(-e))
            else:
                g = 1.0 / (1.0 + math.exp(e))
            return min(max(g, LOG_CLAMP), 1.0 - LOG_CLAMP)
        pts = self.boundary
        exps = [b - a for a, b in pts]  # strictly decreasing
        if not exps[-1] - 1e-12 <= e <= exps[0] + 1e-12:
            raise DomainError(f"exposure {e} outside the boundary's range")
        for i in range(len(pts) - 1):
            if exps[i + 1] <= e <= exps[i]:
                span = exps[i] - exps[i + 1]
                frac = 0.0 if span == 0.0 else (exps[i] - e) / span
                return i + frac
        return float(len(pts) - 1)

    # -- the game/kernel constant ----------------------------------------

    def clambda(self, c_f: float) -> float:
        """Constant pairing the game with a kernel of sup-norm c_f.

        Closed forms for the square and absolute built-ins; numeric sup
        over the forecast probability for log and custom games.  Returns
        inf when the sup diverges.
        """
        if c_f < 0 or not math.isfinite(c_f):
            raise DomainError("c_f must be finite and nonnegative")
        if self.kind is GameKind.SQUARE:
            return c_f / 2.0 if c_f >= 1.0 else (1.0 + c_f * c_f) / 4.0
        if self.kind is GameKind.ABSOLUTE:
            return 0.5 * math.sqrt(1.0 + c_f * c_f)
        return self.clambda_numeric(c_f)

    def clambda_numeric(self, c_f: float) -> float:
        """Generic numeric path for the constant, via exposure_interval."""
        if c_f < 0 or not math.isfinite(c_f):
            raise DomainError("c_f must be finite and nonnegative")

        def h(p):
            e_hi, e_lo = self.exposure_interval(min(max(p, 1e-300), 1 - 1e-16))
            e2 = max(e_hi * e_hi, e_lo * e_lo)
            return p * (1.0 - p) * (e2 + c_f * c_f)

        # log-spaced grid concentrated near both endpoints, where the
        # supremand varies fastest for diverging exposures
        half = np.geomspace(1e-12, 0.5, _CLAMBDA_GRID // 2)
        ps = np.concatenate([half, 1.0 - half[::-1][1:]])
        vals = np.array([h(p) for p in ps])
        best = int(np.argmax(vals))
        if best in (0, len(ps) - 1):
            # still growing at the grid's extreme points: divergent sup
            return math.inf
        lo, hi = ps[best - 1], ps[best + 1]
        res = minimize_scalar(lambda p: -h(p), bounds=(lo, hi),
                              method="bounded",
                              options={"xatol": 1e-12})
        sup = max(vals[best], -res.fun)
        return math.sqrt(sup)
