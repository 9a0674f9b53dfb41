"""Self-monitoring and regulation.

Each tick the engine reads itself (coherence, load, orientation, velocity,
meta depth), writes breach summaries back into its own reflective sector,
decides at most one corrective move by a fixed priority walk, and splits a
fixed effort budget across operator classes.  Regulation competes for the
same budget it allocates, which is what makes overload self-limiting.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping, Sequence

from .config import ParameterConfig
from .core import (
    BeliefState,
    Fragment,
    IdAllocator,
    activation_density,
    sector_projection,
)
from .geometry import compass_reading, distance
from .tower import EpistemicAxis

EFFORT_CLASSES = (
    "corrective",
    "monitors",
    "memory",
    "planning",
    "nullify",
    "abstraction",
    "rest",
)

REFLECTIVE_SECTOR = "refl"
NARRATIVE_SECTOR = "narr"
META_ANCHOR = 2.0


# --------------------------------------------------------------------------
# Measurement
# --------------------------------------------------------------------------

def _conflict_pairs(fragments: Sequence[Fragment]) -> int:
    """Unordered conflicting pairs: shared key, opposite polarity."""
    count = 0
    for i, a in enumerate(fragments):
        if a.key is None:
            continue
        for b in fragments[i + 1:]:
            if b.key == a.key and b.polarity is not None and b.polarity != a.polarity:
                count += 1
    return count


def coherence(state: BeliefState, sector: str | None = None) -> float:
    """1 minus the ordered-conflicting-pair density; the vacuum is coherent.

    Ordered pairs (each unordered conflict counts twice) over n^2, so two
    fragments in direct contradiction score 0.5 and the measure decays
    smoothly as neutral content is added around a dispute.
    """
    frags = state.fragments
    if sector is not None:
        frags = tuple(f for f in frags if sector in f.sectors)
    n = len(frags)
    if n == 0:
        return 1.0
    return 1.0 - (2 * _conflict_pairs(frags)) / (n * n)


def cognitive_load(state: BeliefState, config: ParameterConfig, rate: float) -> float:
    """Fragment count + activation-weighted sector costs + operator rate."""
    if rate < 0:
        raise ValueError(f"operation rate must be >= 0, got {rate}")
    c_count, c_sector, c_rate = config.load_coeffs
    sector_term = sum(
        activation_density(state, s) * config.cost(s) for s in state.sectors()
    )
    return c_count * len(state.fragments) + c_sector * sector_term + c_rate * rate


def meta_depth(state: BeliefState) -> int:
    """1 = plain self-report; grows when reflections reference reflections."""
    levels = [f.level for f in state.fragments if f.origin == "meta"]
    if not levels:
        return 1
    return 1 + max(0, max(levels) - 1)


@dataclass(frozen=True)
class IntrospectiveReport:
    """One tick's self-measurement snapshot."""

    tick: float
    kappa_global: float
    kappa_by_sector: Mapping[str, float]
    load: float
    theta_by_axis: Mapping[str, float]
    velocity: float
    depth: int

    def to_dict(self) -> dict:
        return {
            "tick": self.tick,
            "kappa_global": self.kappa_global,
            "kappa_by_sector": dict(sorted(self.kappa_by_sector.items())),
            "load": self.load,
            "theta_by_axis": dict(sorted(self.theta_by_axis.items())),
            "velocity": self.velocity,
            "depth": self.depth,
        }


def introspect(
    active: BeliefState,
    prev_active: BeliefState | None,
    axes: Mapping[str, EpistemicAxis],
    config: ParameterConfig,
    rate: float,
) -> IntrospectiveReport:
    kappa_by_sector = {
        s: coherence(active, s) for s in active.sectors()
    }
    theta_by_axis = {}
    for label in sorted(axes):
        theta_by_axis[label] = compass_reading(active, axes[label], config).theta
    velocity = 0.0
    if prev_active is not None:
        velocity = distance(active, prev_active, config)
    return IntrospectiveReport(
        tick=active.clock,
        kappa_global=coherence(active),
        kappa_by_sector=kappa_by_sector,
        load=cognitive_load(active, config, rate),
        theta_by_axis=theta_by_axis,
        velocity=velocity,
        depth=meta_depth(active),
    )


# --------------------------------------------------------------------------
# Meta-assimilation: breaches become reflective fragments
# --------------------------------------------------------------------------

def _breach_entries(
    report: IntrospectiveReport, config: ParameterConfig
) -> list[tuple[str, str, str, float]]:
    """(metric, target, direction, value) rows, in a fixed scan order."""
    rows: list[tuple[str, str, str, float]] = []
    if report.kappa_global < config.kappa_crit:
        rows.append(("coherence", "global", "low", report.kappa_global))
    for sector, kappa in sorted(report.kappa_by_sector.items()):
        if kappa < config.kappa_crit:
            rows.append(("coherence", sector, "low", kappa))
    if report.load > config.l_max:
        rows.append(("load", "global", "high", report.load))
    for label, theta in sorted(report.theta_by_axis.items()):
        if theta > config.tau_theta:
            rows.append(("orientation", label, "high", theta))
    return rows


def _meta_text(metric: str, target: str, direction: str, value: float) -> str:
    return f"{metric} {target} {direction} {round(value, 2):g}"


def meta_assimilate(
    active: BeliefState,
    report: IntrospectiveReport,
    config: ParameterConfig,
    ids: IdAllocator,
) -> tuple[BeliefState, list[Fragment], list[str]]:
    """Fold breach summaries into the reflective sector.

    One fragment per (metric, target); a repeat breach updates the existing
    fragment in place (same id, fresh text/timestamp) instead of piling up.
    A breach about the reflective sector itself stacks one level higher than
    the deepest reflection so depth actually measures self-reference; the
    stack is capped at meta_depth_max and over-cap reflections are dropped
    with a warning rather than written.
    """
    warnings: list[str] = []
    emitted: list[Fragment] = []
    existing_meta = {
        tuple(f.tokens[:2]): f for f in active.fragments if f.origin == "meta"
    }
    state = active
    for metric, target, direction, value in _breach_entries(report, config):
        text = _meta_text(metric, target, direction, value)
        level = 2
        if target == REFLECTIVE_SECTOR:
            deepest = max(
                (f.level for f in state.fragments if f.origin == "meta"),
                default=1,
            )
            level = deepest + 1
        if 1 + max(0, level - 1) > config.meta_depth_max:
            warnings.append(
                f"reflection depth cap {config.meta_depth_max}: "
                f"dropped {metric} {target}"
            )
            continue
        slot = existing_meta.get((metric, target))
        if slot is not None:
            updated = slot.replace(
                text=text,
                level=level,
                anchor=META_ANCHOR,
                persistence=1.0,
                created_at=state.clock,
            )
            state = state.replace_fragment(updated)
            existing_meta[(metric, target)] = updated
            emitted.append(updated)
        else:
            frag = Fragment(
                id=ids.next(),
                text=text,
                sectors=frozenset({REFLECTIVE_SECTOR}),
                level=level,
                anchor=META_ANCHOR,
                persistence=1.0,
                created_at=state.clock,
                origin="meta",
            )
            state = state.with_fragments((*state.fragments, frag))
            existing_meta[(metric, target)] = frag
            emitted.append(frag)
    return state, emitted, warnings


# --------------------------------------------------------------------------
# Identity
# --------------------------------------------------------------------------

def identity_signature(state: BeliefState, config: ParameterConfig) -> frozenset:
    """Content keys of strongly anchored reflective/narrative fragments."""
    keep = frozenset({REFLECTIVE_SECTOR, NARRATIVE_SECTOR})
    return frozenset(
        f.content_key()
        for f in state.fragments
        if f.sectors & keep and f.anchor >= config.a_core
    )


def identity_stability(sig_a: frozenset, sig_b: frozenset) -> float:
    """Jaccard overlap of two identity signatures; two blanks agree fully."""
    if not sig_a and not sig_b:
        return 1.0
    return len(sig_a & sig_b) / len(sig_a | sig_b)


# --------------------------------------------------------------------------
# Effort
# --------------------------------------------------------------------------

@dataclass
class EffortLedger:
    """Per-class budget with spend tracking for one tick."""

    allocations: dict[str, float] = field(default_factory=dict)
    spent: dict[str, float] = field(default_factory=dict)

    def __post_init__(self) -> None:
        for cls in EFFORT_CLASSES:
            self.allocations.setdefault(cls, 0.0)
            self.spent.setdefault(cls, 0.0)

    def available(self, cls: str) -> float:
        return self.allocations[cls] - self.spent[cls]

    def can_afford(self, cls: str, amount: float) -> bool:
        return self.available(cls) + 1e-12 >= amount

    def charge(self, cls: str, amount: float) -> bool:
        """Spend from a class; returns False (and spends nothing) if short."""
        if amount < 0:
            raise ValueError(f"cannot charge negative effort {amount}")
        if not self.can_afford(cls, amount):
            return False
        self.spent[cls] += amount
        return True

    def to_dict(self) -> dict:
        return {
            "allocations": {c: self.allocations[c] for c in EFFORT_CLASSES},
            "spent": {c: self.spent[c] for c in EFFORT_CLASSES},
        }


def uniform_ledger(config: ParameterConfig) -> EffortLedger:
    share = config.effort_total / len(EFFORT_CLASSES)
    return EffortLedger(allocations={cls: share for cls in EFFORT_CLASSES})


def allocate_effort(
    report: IntrospectiveReport,
    goals_present: bool,
    config: ParameterConfig,
) -> EffortLedger:
    """Split the budget by the most pressing condition, in priority order.

    Coherence trouble funds correction, overload funds pruning and
    abstraction, open goals fund planning and memory, and a quiet tick
    spreads the budget uniformly.  Unnamed classes get zero: scarcity under
    stress is the point.
    """
    total = config.effort_total
    kappa_breach = report.kappa_global < config.kappa_crit or any(
        v < config.kappa_crit for v in report.kappa_by_sector.values()
    )
    alloc: dict[str, float] = {cls: 0.0 for cls in EFFORT_CLASSES}
    if kappa_breach:
        alloc["corrective"] = 0.6 * total
        alloc["monitors"] = 0.2 * total
        alloc["rest"] = 0.2 * total
    elif report.load > config.l_max:
        alloc["nullify"] = 0.5 * total
        alloc["abstraction"] = 0.3 * total
        alloc["monitors"] = 0.2 * total
    elif goals_present:
        alloc["planning"] = 0.5 * total
        alloc["memory"] = 0.3 * total
        alloc["monitors"] = 0.2 * total
    else:
        share = total / len(EFFORT_CLASSES)
        alloc = {cls: share for cls in EFFORT_CLASSES}
    return EffortLedger(allocations=alloc)


# --------------------------------------------------------------------------
# The regulation decision
# --------------------------------------------------------------------------

REGULATION_KINDS = (
    "annihilate_sector",
    "corrective_assimilation",
    "accelerate_nullify",
    "realign",
    "none",
)


@dataclass(frozen=True)
class RegulationAction:
    kind: str
    target: str | None
    reason: str

    def to_dict(self) -> dict:
        return {"kind": self.kind, "target": self.target, "reason": self.reason}


def _most_conflicted_sector(state: BeliefState) -> str | None:
    best: str | None = None
    best_count = 0
    for sector in state.sectors():
        count = _conflict_pairs(sector_projection(state, sector).fragments)
        if count > best_count:
            best = sector
            best_count = count
    if best is not None:
        return best
    # Cross-sector conflict: no single projection contains a pair.  Fall back
    # to the lexicographically first sector touching the first conflict.
    for i, a in enumerate(state.fragments):
        if a.key is None:
            continue
        for b in state.fragments[i + 1:]:
            if b.key == a.key and b.polarity is not None and b.polarity != a.polarity:
                return min(a.sectors | b.sectors)
    return None


def _lowest_priority_sector(state: BeliefState, config: ParameterConfig) -> str | None:
    present = list(state.sectors())
    if not present:
        return None
    order = list(config.sector_priority)

    def rank(sector: str) -> tuple[int, str]:
        try:
            return (order.index(sector), sector)
        except ValueError:
            return (len(order), sector)

    return max(present, key=rank)


def regulate(
    report: IntrospectiveReport,
    active: BeliefState,
    config: ParameterConfig,
    kappa_breach_ticks: int,
) -> RegulationAction:
    """Pick at most one corrective move for this tick.

    Priority: a coherence breach that has outlasted patience wipes the most
    conflicted sector; a fresh breach gets a corrective sweep first; then
    overload accelerates decay of the lowest-priority active sector; then a
    lost bearing triggers realignment; otherwise nothing.
    """
    kappa_values = [report.kappa_global, *report.kappa_by_sector.values()]
    worst_kappa = min(kappa_values) if kappa_values else 1.0
    kappa_breach = worst_kappa < config.kappa_crit

    if kappa_breach and kappa_breach_ticks >= config.patience:
        target = _most_conflicted_sector(active)
        if target is not None:
            return RegulationAction(
                kind="annihilate_sector",
                target=target,
                reason=(
                    f"kappa {worst_kappa:.6g} < {config.kappa_crit:g} "
                    f"for {kappa_breach_ticks} ticks"
                ),
            )
    if kappa_breach:
        return RegulationAction(
            kind="corrective_assimilation",
            target=None,
            reason=f"kappa {worst_kappa:.6g} < {config.kappa_crit:g}",
        )
    if report.load > config.l_max:
        target = _lowest_priority_sector(active, config)
        if target is not None:
            return RegulationAction(
                kind="accelerate_nullify",
                target=target,
                reason=f"load {report.load:.6g} > {config.l_max:g}",
            )
    breached_axes = sorted(
        label
        for label, theta in report.theta_by_axis.items()
        if theta > config.tau_theta
    )
    if breached_axes:
        label = breached_axes[0]
        return RegulationAction(
            kind="realign",
            target=label,
            reason=(
                f"theta {report.theta_by_axis[label]:.6g} > {config.tau_theta:g} "
                f"on {label}"
            ),
        )
    return RegulationAction(kind="none", target=None, reason="all clear")


__all__ = [
    "EFFORT_CLASSES",
    "EffortLedger",
    "IntrospectiveReport",
    "META_ANCHOR",
    "NARRATIVE_SECTOR",
    "REFLECTIVE_SECTOR",
    "REGULATION_KINDS",
    "RegulationAction",
    "allocate_effort",
    "coherence",
    "cognitive_load",
    "identity_signature",
    "identity_stability",
    "introspect",
    "meta_assimilate",
    "meta_depth",
    "regulate",
    "uniform_ledger",
]
