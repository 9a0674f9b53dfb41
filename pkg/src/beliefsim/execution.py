"""Activation basins: graded readiness and gated action release.

A basin names an action and the conditions under which it may fire.  Each
condition clause scores the current state in [0, 1]; readiness is their
geometric mean, so one dead clause vetoes the whole basin.  Firing further
requires clearing a threshold, positive momentum since the last look,
approval from reflective gate rules, and a live (non-simulation) run mode.
At most one action fires per tick.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

from .core import BeliefState, activation_density, tokenize
from .regulation import REFLECTIVE_SECTOR, coherence

CLAUSE_KINDS = (
    "sector_density",
    "level_present",
    "coherence_conflict",
    "token_present",
)

GATE_ACTIONS = ("approve", "delay", "suppress")

VERDICTS = (
    "fired",
    "suppressed",
    "below_threshold",
    "no_momentum",
    "gated_delay",
    "gated_suppress",
    "blocked_simulation",
)

SATURATION = 1.0 - 1e-12


@dataclass(frozen=True)
class Clause:
    """One scored condition over the active state.

    sector_density     -- mass share of ``sector`` against ``minimum``;
                          scores proportionally and saturates at 1.
    level_present      -- 1 iff some fragment sits at exactly ``level``.
    coherence_conflict -- 1 iff the sector's incoherence (1 - kappa) stays
                          within ``tolerance``.
    token_present      -- 1 iff ``token`` occurs in any fragment
                          (optionally restricted to ``sector``).
    """

    kind: str
    sector: str | None = None
    minimum: float | None = None
    level: int | None = None
    tolerance: float | None = None
    token: str | None = None

    def __post_init__(self) -> None:
        if self.kind not in CLAUSE_KINDS:
            raise ValueError(f"unknown clause kind {self.kind!r}")
        if self.kind == "sector_density":
            if not self.sector:
                raise ValueError("sector_density clause needs a sector")
            if self.minimum is None or self.minimum <= 0:
                raise ValueError("sector_density clause needs minimum > 0")
        elif self.kind == "level_present":
            if self.level is None or self.level < 0:
                raise ValueError("level_present clause needs level >= 0")
        elif self.kind == "coherence_conflict":
            if not self.sector:
                raise ValueError("coherence_conflict clause needs a sector")
            if self.tolerance is None or self.tolerance < 0:
                raise ValueError("coherence_conflict clause needs tolerance >= 0")
        elif self.kind == "token_present":
            if not self.token:
                raise ValueError("token_present clause needs a token")

    def score(self, state: BeliefState) -> float:
        if self.kind == "sector_density":
            return min(activation_density(state, self.sector) / self.minimum, 1.0)
        if self.kind == "level_present":
            return 1.0 if any(f.level == self.level for f in state.fragments) else 0.0
        if self.kind == "coherence_conflict":
            return 1.0 if (1.0 - coherence(state, self.sector)) <= self.tolerance else 0.0
        # token_present
        for f in state.fragments:
            if self.sector is not None and self.sector not in f.sectors:
                continue
            if self.token in f.tokens:
                return 1.0
        return 0.0

    def to_dict(self) -> dict:
        out: dict = {"kind": self.kind}
        for name in ("sector", "minimum", "level", "tolerance", "token"):
            value = getattr(self, name)
            if value is not None:
                out[name] = value
        return out


@dataclass(frozen=True)
class GateRule:
    """Reflective veto: pattern tokens found in one refl fragment."""

    pattern: str
    action: str

    def __post_init__(self) -> None:
        if self.action not in GATE_ACTIONS:
            raise ValueError(f"unknown gate action {self.action!r}")
        if not tokenize(self.pattern):
            raise ValueError("gate pattern must contain at least one token")

    def matches(self, state: BeliefState) -> bool:
        wanted = set(tokenize(self.pattern))
        for f in state.fragments:
            if REFLECTIVE_SECTOR not in f.sectors:
                continue
            if wanted <= set(f.tokens):
                return True
        return False


@dataclass(frozen=True)
class ActionBasin:
    name: str
    clauses: tuple[Clause, ...]
    tau: float
    suppressors: tuple[Clause, ...] = ()
    gate_policy: tuple[GateRule, ...] = ()

    def __post_init__(self) -> None:
        if not self.name:
            raise ValueError("basin name must be non-empty")
        if not self.clauses:
            raise ValueError(f"basin {self.name!r} needs at least one clause")
        if not 0.0 <= self.tau < 1.0:
            raise ValueError(f"basin {self.name!r}: tau must be in [0, 1)")


def readiness(basin: ActionBasin, state: BeliefState) -> tuple[float, tuple[float, ...]]:
    """Geometric mean of clause scores, plus the individual scores."""
    scores = tuple(c.score(state) for c in basin.clauses)
    if any(s == 0.0 for s in scores):
        return 0.0, scores
    value = math.exp(sum(math.log(s) for s in scores) / len(scores))
    return min(value, 1.0), scores


@dataclass(frozen=True)
class ActionDecision:
    action: str
    verdict: str
    readiness: float
    momentum: float
    clause_scores: tuple[float, ...] = ()
    reason: str = ""

    def to_dict(self) -> dict:
        return {
            "action": self.action,
            "verdict": self.verdict,
            "readiness": self.readiness,
            "momentum": self.momentum,
            "clause_scores": list(self.clause_scores),
            "reason": self.reason,
        }


def evaluate_action(
    basin: ActionBasin,
    state: BeliefState,
    prev_readiness: float,
    mode: str,
) -> ActionDecision:
    """Walk the veto ladder for one basin; the first failing rung names
    the verdict, and only a clean descent ends in ``fired``."""
    value, scores = readiness(basin, state)
    momentum = value - prev_readiness

    for suppressor in basin.suppressors:
        if suppressor.score(state) >= SATURATION:
            return ActionDecision(
                basin.name, "suppressed", value, momentum, scores,
                reason="suppressor saturated",
            )
    if value <= basin.tau:
        return ActionDecision(
            basin.name, "below_threshold", value, momentum, scores,
            reason=f"readiness {value:.6g} <= tau {basin.tau:g}",
        )
    if momentum <= 0.0:
        return ActionDecision(
            basin.name, "no_momentum", value, momentum, scores,
            reason=f"momentum {momentum:.6g} <= 0",
        )
    for rule in basin.gate_policy:
        if rule.matches(state):
            if rule.action == "delay":
                return ActionDecision(
                    basin.name, "gated_delay", value, momentum, scores,
                    reason=f"gate pattern {rule.pattern!r}",
                )
            if rule.action == "suppress":
                return ActionDecision(
                    basin.name, "gated_suppress", value, momentum, scores,
                    reason=f"gate pattern {rule.pattern!r}",
                )
            break  # explicit approval ends the gate walk
    if mode == "simulation":
        return ActionDecision(
            basin.name, "blocked_simulation", value, momentum, scores,
            reason="simulation mode blocks outward actions",
        )
    return ActionDecision(basin.name, "fired", value, momentum, scores)


def resolve_actions(decisions: Sequence[ActionDecision]) -> list[ActionDecision]:
    """Keep at most one ``fired`` decision; demote the rest to gated_delay.

    The winner is the highest readiness, ties to the lexicographically
    smallest action name, so resolution is deterministic under reordering.
    """
    fired = [d for d in decisions if d.verdict == "fired"]
    if len(fired) <= 1:
        return list(decisions)
    winner = min(fired, key=lambda d: (-d.readiness, d.action))
    out = []
    for d in decisions:
        if d.verdict == "fired" and d.action != winner.action:
            d = ActionDecision(
                d.action, "gated_delay", d.readiness, d.momentum,
                d.clause_scores, reason="lost_resolution",
            )
        out.append(d)
    return out


__all__ = [
    "ActionBasin",
    "ActionDecision",
    "CLAUSE_KINDS",
    "Clause",
    "GATE_ACTIONS",
    "GateRule",
    "SATURATION",
    "VERDICTS",
    "evaluate_action",
    "readiness",
    "resolve_actions",
]
