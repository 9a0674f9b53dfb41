"""Fragments, belief states, and the deterministic text embedding.

A belief state is a finite ensemble of linguistic fragments plus a logical
clock.  States are immutable value snapshots: every operator takes states in
and hands new states back, which is what makes runs replayable and traces
byte-stable.

The embedding is a fixed token-hash bag-of-words: each lowercased alphanumeric
token is hashed (blake2b, independent of PYTHONHASHSEED) into one of
``embed_dim`` cells, counts accumulate, and the cell vector is L2-normalized.
Equal token multisets therefore embed to bitwise-equal vectors, and all
geometry downstream (distance, compass, retrieval scores) inherits that
determinism.
"""

from __future__ import annotations

import hashlib
import itertools
import re
from collections import Counter
from dataclasses import dataclass
from dataclasses import replace as dc_replace
from functools import lru_cache
from typing import Any, Iterable, Mapping, Optional, Sequence

import numpy as np

ORIGINS = frozenset(
    {"observed", "elaborated", "abstracted", "retrieved", "meta", "drifted", "synthetic"}
)
POLARITIES = ("+", "-")

_TOKEN_RE = re.compile(r"[a-z0-9]+")


def tokenize(text: str) -> tuple[str, ...]:
    """Lowercased alphanumeric tokens, in order of appearance."""
    return tuple(_TOKEN_RE.findall(text.lower()))


@dataclass(frozen=True)
class Fragment:
    """One linguistic belief expression with its metadata.

    ``anchor`` is resistance to decay; ``persistence`` is residual strength in
    [0, 1]; ``level`` is the abstraction height; ``members`` records the
    constituent fragment ids of an abstracted summary.
    """

    id: int
    text: str
    sectors: frozenset[str]
    level: int = 0
    anchor: float = 1.0
    persistence: float = 1.0
    created_at: float = 0.0
    origin: str = "observed"
    key: Optional[str] = None
    polarity: Optional[str] = None
    members: Optional[tuple[int, ...]] = None

    def __post_init__(self) -> None:
        tokens = tokenize(self.text)
        if not tokens:
            raise ValueError(f"fragment {self.id}: text has no tokens: {self.text!r}")
        object.__setattr__(self, "_tokens", tokens)
        if not self.sectors:
            raise ValueError(f"fragment {self.id}: needs at least one sector tag")
        if self.level < 0:
            raise ValueError(f"fragment {self.id}: level must be >= 0, got {self.level}")
        if self.anchor < 0:
            raise ValueError(f"fragment {self.id}: anchor must be >= 0, got {self.anchor}")
        if not (0.0 <= self.persistence <= 1.0):
            raise ValueError(
                f"fragment {self.id}: persistence must lie in [0, 1], got {self.persistence}"
            )
        if self.origin not in ORIGINS:
            raise ValueError(f"fragment {self.id}: unknown origin {self.origin!r}")
        if (self.key is None) != (self.polarity is None):
            raise ValueError(f"fragment {self.id}: key and polarity must be set together")
        if self.polarity is not None and self.polarity not in POLARITIES:
            raise ValueError(f"fragment {self.id}: polarity must be '+' or '-'")
        has_members = bool(self.members)
        if has_members != (self.origin == "abstracted"):
            raise ValueError(
                f"fragment {self.id}: members must be non-empty iff origin is 'abstracted'"
            )

    @property
    def tokens(self) -> tuple[str, ...]:
        return self._tokens  # type: ignore[attr-defined]

    @property
    def weight(self) -> float:
        """Effective mass anchor * persistence."""
        return self.anchor * self.persistence

    def content_key(self) -> tuple:
        """Canonical content identity: (token multiset, key, polarity, sectors, level).

        Two fragments with equal content keys are exact duplicates for
        assimilation and for gauge observables, regardless of id, anchor,
        persistence, origin, or token order.
        """
        counts = tuple(sorted(Counter(self.tokens).items()))
        return (
            counts,
            self.key or "",
            self.polarity or "",
            tuple(sorted(self.sectors)),
            self.level,
        )

    def replace(self, **overrides: Any) -> "Fragment":
        return dc_replace(self, **overrides)


@dataclass(frozen=True)
class BeliefState:
    """An immutable fragment ensemble plus a logical clock."""

    fragments: tuple[Fragment, ...] = ()
    clock: float = 0.0

    def __post_init__(self) -> None:
        ids = [f.id for f in self.fragments]
        if len(set(ids)) != len(ids):
            dupes = sorted({i for i in ids if ids.count(i) > 1})
            raise ValueError(f"duplicate fragment ids in state: {dupes}")
        if self.clock < 0:
            raise ValueError(f"clock must be >= 0, got {self.clock}")
        # Canonical id order, so equal fragment sets compare equal.
        object.__setattr__(
            self, "fragments", tuple(sorted(self.fragments, key=lambda f: f.id))
        )

    @property
    def is_vacuum(self) -> bool:
        return not self.fragments

    def get(self, fragment_id: int) -> Optional[Fragment]:
        for f in self.fragments:
            if f.id == fragment_id:
                return f
        return None

    def ids(self) -> frozenset[int]:
        return frozenset(f.id for f in self.fragments)

    def sectors(self) -> tuple[str, ...]:
        """All sector tags present, sorted."""
        tags: set[str] = set()
        for f in self.fragments:
            tags |= f.sectors
        return tuple(sorted(tags))

    def with_fragments(self, fragments: Iterable[Fragment]) -> "BeliefState":
        return BeliefState(tuple(fragments), self.clock)

    def with_clock(self, clock: float) -> "BeliefState":
        return BeliefState(self.fragments, clock)

    def without_ids(self, drop: Iterable[int]) -> "BeliefState":
        gone = set(drop)
        return self.with_fragments(f for f in self.fragments if f.id not in gone)

    def replace_fragment(self, updated: Fragment) -> "BeliefState":
        return self.with_fragments(
            updated if f.id == updated.id else f for f in self.fragments
        )


class IdAllocator:
    """Monotonic fragment-id source, one per engine run."""

    def __init__(self, start: int = 1) -> None:
        self._counter = itertools.count(start)

    def next(self) -> int:
        return next(self._counter)


# --------------------------------------------------------------------------
# Embeddings
# --------------------------------------------------------------------------

def token_cell(token: str, dim: int) -> int:
    """Fixed, seed-independent hash of a token into [0, dim)."""
    digest = hashlib.blake2b(token.encode("utf-8"), digest_size=8).digest()
    return int.from_bytes(digest, "big") % dim


@lru_cache(maxsize=8192)
def _embed_counts(token_counts: tuple[tuple[str, int], ...], dim: int) -> np.ndarray:
    vec = np.zeros(dim, dtype=np.float64)
    for token, count in token_counts:
        vec[token_cell(token, dim)] += count
    norm = float(np.linalg.norm(vec))
    if norm > 0.0:
        vec /= norm
    vec.setflags(write=False)  # cached arrays are shared; never mutate
    return vec


def embed_tokens(tokens: Sequence[str], dim: int) -> np.ndarray:
    """Normalized bag-of-words vector of a token multiset."""
    counts = tuple(sorted(Counter(tokens).items()))
    return _embed_counts(counts, dim)


def embed_fragment(fragment: Fragment, dim: int) -> np.ndarray:
    return embed_tokens(fragment.tokens, dim)


def embed_state(state: BeliefState, dim: int) -> np.ndarray:
    """Mass-weighted mean of fragment vectors, L2-normalized.

    Weights are anchor * persistence so faded content bends the geometry
    less.  The vacuum embeds to the zero vector.  If every weight is zero in
    a non-vacuum state, the unweighted mean is used so the unit-norm
    invariant still holds.
    """
    if state.is_vacuum:
        return np.zeros(dim, dtype=np.float64)
    total = sum(f.weight for f in state.fragments)
    acc = np.zeros(dim, dtype=np.float64)
    if total > 0.0:
        for f in state.fragments:
            if f.weight > 0.0:
                acc += f.weight * embed_fragment(f, dim)
    else:
        for f in state.fragments:
            acc += embed_fragment(f, dim)
    norm = float(np.linalg.norm(acc))
    if norm > 0.0:
        acc = acc / norm
    return acc


# --------------------------------------------------------------------------
# Observation encoding and sector views
# --------------------------------------------------------------------------

def fragment_from_spec(
    spec: Mapping[str, Any],
    fragment_id: int,
    clock: float,
    *,
    origin: str = "observed",
    default_sector: str = "perc",
) -> Fragment:
    """Build one fragment from a structured spec mapping.

    Recognized keys: text (required), sector or sectors, level, anchor,
    persistence, key, polarity.  Unrecognized keys (e.g. a scenario "name")
    are ignored here; the loader tracks them.
    """
    text = str(spec.get("text", ""))
    sectors = spec.get("sectors")
    if sectors is None:
        sectors = [spec.get("sector", default_sector)]
    return Fragment(
        id=fragment_id,
        text=text,
        sectors=frozenset(str(s) for s in sectors),
        level=int(spec.get("level", 0)),
        anchor=float(spec.get("anchor", 1.0)),
        persistence=float(spec.get("persistence", 1.0)),
        created_at=clock,
        origin=origin,
        key=spec.get("key"),
        polarity=spec.get("polarity"),
    )


def encode_observation(
    specs: Sequence[Mapping[str, Any]],
    clock: float,
    ids: IdAllocator,
) -> BeliefState:
    """Structured observation ingestion: specs in, observed fragments out.

    Defaults per spec entry: sector "perc", level 0, anchor 1.0.  Persistence
    is always 1.0 for fresh observations.  An empty-text spec is rejected
    with its index so scenario authors can find it.
    """
    fragments = []
    for i, spec in enumerate(specs):
        if not tokenize(str(spec.get("text", ""))):
            raise ValueError(f"observation spec {i}: empty text")
        frag = fragment_from_spec(spec, ids.next(), clock, origin="observed")
        frag = frag.replace(persistence=1.0)
        fragments.append(frag)
    return BeliefState(tuple(fragments), clock)


def sector_projection(state: BeliefState, sector: str) -> BeliefState:
    """The sub-state of fragments tagged with ``sector``; clock preserved."""
    return state.with_fragments(f for f in state.fragments if sector in f.sectors)


def activation_density(state: BeliefState, sector: str) -> float:
    """Share of total mass (anchor * persistence) carried by ``sector``."""
    total = sum(f.weight for f in state.fragments)
    if total <= 0.0:
        return 0.0
    tagged = sum(f.weight for f in state.fragments if sector in f.sectors)
    return tagged / total


def is_vacuum(state: BeliefState) -> bool:
    return state.is_vacuum


__all__ = [
    "BeliefState",
    "Fragment",
    "IdAllocator",
    "ORIGINS",
    "POLARITIES",
    "activation_density",
    "embed_fragment",
    "embed_state",
    "embed_tokens",
    "encode_observation",
    "fragment_from_spec",
    "is_vacuum",
    "sector_projection",
    "token_cell",
    "tokenize",
]
