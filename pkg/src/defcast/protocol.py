"""The online decision loop: datum -> decision -> observation.

The engine wraps a forecaster, converts forecasts to decisions through the
game's canonical choice function, tracks cumulative loss, and evaluates
benchmark decision rules given as kernel expansions of their exposure.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from defcast.forecaster import Branch, Forecaster, RootReport
from defcast.games import Forecast, Game, GameKind
from defcast.kernels import Kernel, KernelExpansion


class UsageError(RuntimeError):
    """Protocol methods called out of order."""


class ComparatorError(ValueError):
    """Benchmark rule not admissible for the game on the observed data."""


@dataclass(frozen=True)
class Comparator:
    """A benchmark decision rule, encoded by its exposure expansion."""

    exposure_fn: KernelExpansion
    norm: float

    @staticmethod
    def build(exposure_fn: KernelExpansion) -> "Comparator":
        return Comparator(exposure_fn, exposure_fn.norm())


@dataclass
class RoundRecord:
    n: int
    x: float
    p: float
    q: float
    gamma: float
    y: int
    loss: float
    s_residual: float
    branch: Branch


class Engine:
    """One online decision sequence; single-writer."""

    def __init__(self, game: Game, kernel: Kernel, **forecaster_kwargs):
        self.game = game
        self.kernel = kernel
        self.forecaster = Forecaster(game, kernel, **forecaster_kwargs)
        self.cumulative_loss = 0.0
        self.round_log: list[RoundRecord] = []
        self._pending: tuple[object, RootReport, float] | None = None

    @property
    def rounds(self) -> int:
        return len(self.round_log)

    @property
    def pending_forecast(self) -> Forecast | None:
        return self._pending[1].forecast if self._pending else None

    def decide(self, x) -> float:
        """Produce the decision for datum x; awaits the observation next."""
        if self._pending is not None:
            raise UsageError("previous round still awaiting an observation")
        report = self.forecaster.next_forecast(x)
        gamma = self.game.canonical_choice(report.forecast).gamma
        self._pending = (x, report, gamma)
        return gamma

    def observe(self, y: int) -> None:
        """Log the outcome of the pending decision."""
        if self._pending is None:
            raise UsageError("observe called without a pending decision")
        x, report, gamma = self._pending
        self._pending = None
        loss = self.game.loss(y, gamma)
        self.cumulative_loss += loss
        self.forecaster.update(x, report.forecast, y,
                               s_residual=report.s_residual,
                               branch=report.branch)
        f = report.forecast
        self.round_log.append(RoundRecord(
            len(self.round_log) + 1, x, f.p, f.q, gamma, int(y), loss,
            report.s_residual, report.branch))

    # -- comparators ------------------------------------------------------

    def _comparator_exposures(self, c: Comparator) -> list[float]:
        vals = [float(c.exposure_fn(r.x)) for r in self.round_log]
        if self.game.kind in (GameKind.SQUARE, GameKind.ABSOLUTE):
            bad = [v for v in vals if abs(v) > 1.0 + 1e-12]
            if bad:
                raise ComparatorError(
                    f"exposure {bad[0]} outside [-1,1]: the rule does not "
                    "map into the decision set")
        return vals

    def comparator_round_losses(self, c: Comparator) -> list[float]:
        """Per-round losses of the benchmark rule D = inverse exposure."""
        losses = []
        for rec, v in zip(self.round_log, self._comparator_exposures(c)):
            gamma = self.game.decision_from_exposure(
                min(max(v, -1.0), 1.0)
                if self.game.kind in (GameKind.SQUARE, GameKind.ABSOLUTE)
                else v)
            losses.append(self.game.loss(rec.y, gamma))
        return losses

    def comparator_loss(self, c: Comparator) -> float:
        """Replay the log under the benchmark rule."""
        return float(sum(self.comparator_round_losses(c)))

    def regret_bound(self, c: Comparator) -> float:
        """Worst-case regret bound for the benchmark rule after N rounds."""
        n = self.rounds
        if n == 0:
            return 0.0
        cl = self.game.clambda(self.kernel.c_f())
        return cl * (c.norm + 1.0) * math.sqrt(n)

    def root_slack(self, c: Comparator) -> float:
        # inexact roots perturb the capital bookkeeping by at most the
        # accumulated residual, scaled by the comparator's norm
        return 2.0 * self.forecaster.residual_total * (1.0 + c.norm)

    def regret_report(self, comparators: list[Comparator]) -> dict:
        """Per-comparator regret rows plus both run certificates."""
        lhs, rhs = self.forecaster.k29_certificate()
        cert_slack = 2.0 * self.forecaster.residual_total
        report = {
            "rounds": self.rounds,
            "cumulative_loss": self.cumulative_loss,
            "residual_total": self.forecaster.residual_total,
            "large_numbers_certificate": {
                "lhs": lhs,
                "rhs": rhs,
                "slack": cert_slack,
                "pass": lhs <= rhs + cert_slack,
            },
            "comparators": [],
        }
        for c in comparators:
            closs = self.comparator_loss(c)
            bound = self.regret_bound(c)
            slack = self.root_slack(c)
            res_lhs, res_bound = self.forecaster.resolution_certificate(
                c.exposure_fn)
            res_slack = c.norm * math.sqrt(cert_slack) if cert_slack > 0 else 0.0
            report["comparators"].append({
                "norm": c.norm,
                "own_loss": self.cumulative_loss,
                "comparator_loss": closs,
                "realized_regret": self.cumulative_loss - closs,
                "bound": bound,
                "slack": slack,
                "pass": self.cumulative_loss <= closs + bound + slack,
                "resolution": {
                    "lhs": res_lhs,
                    "bound": res_bound,
                    "slack": res_slack,
                    "pass": res_lhs <= res_bound + res_slack,
                },
            })
        return report

    # -- export -----------------------------------------------------------

    CSV_HEADER = "n,x,p,q,gamma,y,loss,s_residual,branch"

    def round_log_rows(self) -> list[str]:
        rows = [self.CSV_HEADER]
        for r in self.round_log:
            rows.append(",".join([
                str(r.n), repr(float(r.x)), repr(r.p), repr(r.q),
                repr(r.gamma), str(r.y), repr(r.loss), repr(r.s_residual),
                r.branch.value]))
        return rows
