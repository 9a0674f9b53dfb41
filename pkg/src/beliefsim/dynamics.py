"""Belief lifecycle operators: assimilation, nullification, annihilation, drift.

Assimilation is a staged pipeline:

1. exact duplicates of existing fragments are dropped and instead refresh the
   existing fragment (confirmation: persistence back to 1.0, anchor +1);
2. conflicts between the state and the remaining input are detected (shared
   proposition key, opposite polarity);
3. in corrective modes the lower-anchored party of each conflict is retracted
   (ties: older created_at loses, then the incoming side loses);
4. surviving input is unioned in with persistence 1.0;
5. elaboration rules fire at most once each;
6. in abstracting mode a configured group is merged into one summary;
and, in corrective modes, a final sweep resolves any conflicts remaining
*inside* the merged state (input-internal or elaboration-introduced) with the
same revision rule, so corrective assimilation always ends conflict-free.

Nullification multiplies persistence by exp(-lambda_i * dt) with
lambda_i = lambda0 * f(anchor) and prunes fragments at or below the threshold;
it composes as a semigroup, which is what lets the simulator decay one tick at
a time while coarse analytic checkpoints still match.
"""

from __future__ import annotations

import math
import random
from collections import Counter
from dataclasses import dataclass
from typing import Any, Mapping, Optional, Sequence

from .config import ParameterConfig
from .core import BeliefState, Fragment, IdAllocator, fragment_from_spec, tokenize

ASSIMILATION_MODES = ("elab", "corr", "abs", "conf", "auto")


@dataclass(frozen=True)
class ConflictPair:
    """One contradiction between an existing and an incoming fragment."""

    existing_id: int
    incoming_index: int
    key: str


@dataclass(frozen=True)
class ElaborationRule:
    """Forward rule: when a fragment matches ``trigger``, emit a new fragment.

    The trigger matches a fragment if it equals the fragment's proposition
    key, or if every token of the trigger (tokenized like text, so
    ``light_green`` -> {light, green}) occurs among the fragment's tokens.
    """

    trigger: str
    emit: Mapping[str, Any]

    def matches(self, fragment: Fragment) -> bool:
        if fragment.key is not None and fragment.key == self.trigger:
            return True
        trigger_tokens = set(tokenize(self.trigger))
        return bool(trigger_tokens) and trigger_tokens <= set(fragment.tokens)


@dataclass(frozen=True)
class AssimilationReport:
    added: tuple[int, ...] = ()
    retracted: tuple[int, ...] = ()
    elaborated: tuple[int, ...] = ()
    abstracted: tuple[int, ...] = ()
    conflicts_found: int = 0
    mode: str = "auto"

    def to_dict(self) -> dict[str, Any]:
        return {
            "added": list(self.added),
            "retracted": list(self.retracted),
            "elaborated": list(self.elaborated),
            "abstracted": list(self.abstracted),
            "conflicts_found": self.conflicts_found,
            "mode": self.mode,
        }


class ConflictError(ValueError):
    """Raised when elaborative-only assimilation meets a contradiction."""

    def __init__(self, pairs: Sequence[ConflictPair]):
        self.pairs = tuple(pairs)
        keys = sorted({p.key for p in self.pairs})
        super().__init__(
            f"{len(self.pairs)} conflict(s) on key(s) {keys}; "
            "elaborative mode cannot revise — use corrective mode"
        )


def _opposed(a: Fragment, b: Fragment) -> bool:
    return (
        a.key is not None
        and b.key is not None
        and a.key == b.key
        and a.polarity != b.polarity
    )


def detect_conflicts(state: BeliefState, incoming: BeliefState) -> list[ConflictPair]:
    """All (existing, incoming) pairs sharing a key with opposite polarity.

    Fragments without a proposition key never conflict.
    """
    pairs: list[ConflictPair] = []
    for existing in state.fragments:
        for index, candidate in enumerate(incoming.fragments):
            if _opposed(existing, candidate):
                pairs.append(ConflictPair(existing.id, index, existing.key or ""))
    return pairs


def _revision_loser(existing: Fragment, incoming: Fragment) -> Fragment:
    """Which party of a conflict is retracted: lower anchor, then older
    created_at, then the incoming side."""
    if existing.anchor != incoming.anchor:
        return existing if existing.anchor < incoming.anchor else incoming
    if existing.created_at != incoming.created_at:
        return existing if existing.created_at < incoming.created_at else incoming
    return incoming


def _resolve_internal(fragments: list[Fragment]) -> tuple[list[Fragment], list[int], int]:
    """Resolve conflicts among the fragments of one state.

    Same revision rule; on a full tie the higher id (the later arrival) is
    retracted.  Returns (survivors, retracted ids, conflicts seen).
    """
    alive: dict[int, Fragment] = {f.id: f for f in fragments}
    retracted: list[int] = []
    seen = 0
    ordered = sorted(fragments, key=lambda f: f.id)
    for i, a in enumerate(ordered):
        for b in ordered[i + 1:]:
            if a.id not in alive or b.id not in alive:
                continue
            if _opposed(a, b):
                seen += 1
                if a.anchor != b.anchor:
                    loser = a if a.anchor < b.anchor else b
                elif a.created_at != b.created_at:
                    loser = a if a.created_at < b.created_at else b
                else:
                    loser = b  # higher id: the later arrival loses the tie
                del alive[loser.id]
                retracted.append(loser.id)
    survivors = sorted(alive.values(), key=lambda f: f.id)
    return survivors, retracted, seen


def assimilate(
    state: BeliefState,
    incoming: BeliefState,
    config: ParameterConfig,
    ids: IdAllocator,
    mode: str = "auto",
    rules: Sequence[ElaborationRule] = (),
    abs_group: Optional[str] = None,
) -> tuple[BeliefState, AssimilationReport]:
    """Integrate ``incoming`` into ``state`` under the requested mode.

    Modes: elab (elaboration only; conflicts raise ConflictError), corr
    (conflict revision), abs (abstracting merge over ``abs_group``), conf
    (confirmation/union only), auto (= corr then elab).
    """
    if mode not in ASSIMILATION_MODES:
        raise ValueError(f"unknown assimilation mode {mode!r}")
    clock = state.clock
    current = list(state.fragments)
    by_content = {f.content_key(): f.id for f in current}

    # Stage 1: duplicate refresh (confirmatory behavior).
    fresh: list[Fragment] = []
    for candidate in incoming.fragments:
        twin_id = by_content.get(candidate.content_key())
        if twin_id is not None:
            current = [
                f.replace(anchor=f.anchor + 1.0, persistence=1.0)
                if f.id == twin_id
                else f
                for f in current
            ]
        else:
            fresh.append(candidate)

    # Stage 2: conflict detection against what remains of the input.
    remaining_state = BeliefState(tuple(current), clock)
    remaining_input = BeliefState(tuple(fresh), clock)
    pairs = detect_conflicts(remaining_state, remaining_input)
    conflicts_found = len(pairs)

    retracted: list[int] = []
    if pairs and mode == "elab":
        raise ConflictError(pairs)

    # Stage 3: revision (corrective modes only).
    if pairs and mode in ("corr", "auto"):
        dead_existing: set[int] = set()
        dead_incoming: set[int] = set()
        frame = {f.id: f for f in current}
        for pair in pairs:
            if pair.existing_id in dead_existing or pair.incoming_index in dead_incoming:
                continue  # this conflict dissolved with an earlier retraction
            existing = frame[pair.existing_id]
            candidate = fresh[pair.incoming_index]
            loser = _revision_loser(existing, candidate)
            if loser is existing:
                dead_existing.add(existing.id)
                retracted.append(existing.id)
            else:
                dead_incoming.add(pair.incoming_index)
        current = [f for f in current if f.id not in dead_existing]
        fresh = [f for i, f in enumerate(fresh) if i not in dead_incoming]

    # Stage 4: union; added fragments keep their anchors, persistence resets.
    existing_ids = {f.id for f in current}
    added: list[int] = []
    for candidate in fresh:
        if candidate.id in existing_ids:
            raise ValueError(f"incoming fragment id {candidate.id} collides with state")
        current.append(candidate.replace(persistence=1.0))
        existing_ids.add(candidate.id)
        added.append(candidate.id)

    # Stage 5: elaboration rules, at most once each.
    elaborated: list[int] = []
    if mode in ("elab", "auto"):
        content_now = {f.content_key() for f in current}
        for rule in rules:
            if not any(rule.matches(f) for f in current):
                continue
            emitted = fragment_from_spec(
                rule.emit, ids.next(), clock, origin="elaborated", default_sector="perc"
            )
            emitted = emitted.replace(
                anchor=float(rule.emit.get("anchor", 1.0)), persistence=1.0
            )
            if emitted.content_key() in content_now:
                continue  # refiring would only duplicate
            current.append(emitted)
            content_now.add(emitted.content_key())
            elaborated.append(emitted.id)

    # Stage 6: abstracting merge over a configured group.
    abstracted: list[int] = []
    if mode == "abs" and abs_group:
        from .tower import merge_group  # local import; tower depends on geometry

        group_tokens = set(tokenize(abs_group))
        members = [f for f in current if group_tokens <= set(f.tokens)]
        if len(members) >= 2:
            summary = merge_group(members, config, ids, clock)
            member_ids = {f.id for f in members}
            current = [f for f in current if f.id not in member_ids]
            current.append(summary)
            abstracted.append(summary.id)

    # Final sweep: corrective modes end conflict-free even when the input
    # itself (or an elaboration) carried a contradiction.
    if mode in ("corr", "auto"):
        current, swept, seen = _resolve_internal(current)
        conflicts_found += seen
        for fid in swept:
            if fid in added:
                added.remove(fid)
            elif fid in elaborated:
                elaborated.remove(fid)
            else:
                retracted.append(fid)

    report = AssimilationReport(
        added=tuple(added),
        retracted=tuple(retracted),
        elaborated=tuple(elaborated),
        abstracted=tuple(abstracted),
        conflicts_found=conflicts_found,
        mode=mode,
    )
    return BeliefState(tuple(current), clock), report


# --------------------------------------------------------------------------
# Nullification
# --------------------------------------------------------------------------

def nullify(state: BeliefState, dt: float, config: ParameterConfig) -> BeliefState:
    """Anchored exponential decay over ``dt`` ticks, with pruning.

    Each fragment's persistence is multiplied by exp(-lambda_i * dt); any
    fragment ending at or below the prune threshold is removed.  The clock
    advances by dt.
    """
    if dt < 0:
        raise ValueError(f"dt must be >= 0, got {dt}")
    if dt == 0:
        return state
    survivors = []
    for f in state.fragments:
        decayed = f.persistence * math.exp(-config.decay_rate(f.anchor) * dt)
        if decayed > config.delta:
            survivors.append(f.replace(persistence=decayed))
    return BeliefState(tuple(survivors), state.clock + dt)


def nullify_sector(
    state: BeliefState,
    sector: str,
    dt: float,
    config: ParameterConfig,
) -> BeliefState:
    """Extra decay applied only to one sector, without advancing the clock.

    Used by accelerated nullification: regulation burns down a low-priority
    sector faster than time alone would.
    """
    if dt < 0:
        raise ValueError(f"dt must be >= 0, got {dt}")
    survivors = []
    for f in state.fragments:
        if sector in f.sectors:
            decayed = f.persistence * math.exp(-config.decay_rate(f.anchor) * dt)
            if decayed > config.delta:
                survivors.append(f.replace(persistence=decayed))
        else:
            survivors.append(f)
    return BeliefState(tuple(survivors), state.clock)


def half_life(fragment: Fragment, config: ParameterConfig) -> float:
    """Ticks until the fragment's persistence reaches the prune threshold.

    From the current persistence: t = ln(d / delta) / lambda_i.  Zero if the
    fragment is already at or below the threshold; infinite if its decay rate
    is zero.
    """
    if fragment.persistence <= config.delta:
        return 0.0
    rate = config.decay_rate(fragment.anchor)
    if rate <= 0.0:
        return math.inf
    return math.log(fragment.persistence / config.delta) / rate


# --------------------------------------------------------------------------
# Annihilation
# --------------------------------------------------------------------------

def annihilate(state: BeliefState) -> BeliefState:
    """Total erasure: the vacuum, clock preserved."""
    return BeliefState((), state.clock)


def annihilate_sector(state: BeliefState, sector: str) -> BeliefState:
    """Remove every fragment tagged with ``sector``.

    Multi-tagged fragments are removed entirely (set difference), not
    untagged — untagging would silently change their meaning.
    """
    return state.with_fragments(f for f in state.fragments if sector not in f.sectors)


# --------------------------------------------------------------------------
# Spontaneous drift
# --------------------------------------------------------------------------

DRIFT_ANCHOR = 0.1


def drift(
    state: BeliefState,
    lexicon: Sequence[str],
    rng: random.Random,
    ids: IdAllocator,
) -> tuple[BeliefState, bool]:
    """Sample one low-anchor perceptual fragment from the drift lexicon.

    Returns (state, warned).  With an empty lexicon the state is returned
    unchanged and warned is True; the caller decides how to surface that.
    The generator is advanced in place — thread it explicitly for replay.
    """
    if not lexicon:
        return state, True
    text = lexicon[rng.randrange(len(lexicon))]
    fragment = Fragment(
        id=ids.next(),
        text=text,
        sectors=frozenset({"perc"}),
        level=0,
        anchor=DRIFT_ANCHOR,
        persistence=1.0,
        created_at=state.clock,
        origin="drifted",
    )
    return state.with_fragments((*state.fragments, fragment)), False


__all__ = [
    "ASSIMILATION_MODES",
    "AssimilationReport",
    "ConflictError",
    "ConflictPair",
    "DRIFT_ANCHOR",
    "ElaborationRule",
    "annihilate",
    "annihilate_sector",
    "assimilate",
    "detect_conflicts",
    "drift",
    "half_life",
    "nullify",
    "nullify_sector",
]
