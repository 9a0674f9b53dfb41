"""Shared fixtures and hypothesis strategies for the suite."""

from __future__ import annotations

import pytest
from hypothesis import strategies as st

from beliefsim.config import default_config
from beliefsim.core import BeliefState, Fragment

# A small closed vocabulary so random fragments actually overlap and the
# pairing / retrieval machinery has structure to find.
WORDS = (
    "pump", "valve", "seal", "light", "red", "green", "coolant", "flow",
    "steady", "noisy", "check", "the", "panel", "warning", "terrain",
    "survey", "grid", "wind", "rain", "static",
)

SECTORS = ("perc", "task", "plan", "mem", "refl", "narr", "lang", "affect")

KEYS = ("p", "q", "valve", "seal")


@pytest.fixture()
def cfg():
    return default_config()


def make_fragment(
    fid: int,
    text: str = "pump steady",
    *,
    sectors=("perc",),
    level: int = 0,
    anchor: float = 1.0,
    persistence: float = 1.0,
    created_at: float = 0.0,
    origin: str = "observed",
    key=None,
    polarity=None,
    members=None,
) -> Fragment:
    return Fragment(
        id=fid,
        text=text,
        sectors=frozenset(sectors),
        level=level,
        anchor=anchor,
        persistence=persistence,
        created_at=created_at,
        origin=origin,
        key=key,
        polarity=polarity,
        members=members,
    )


def texts(min_tokens: int = 1, max_tokens: int = 5):
    return st.lists(
        st.sampled_from(WORDS), min_size=min_tokens, max_size=max_tokens
    ).map(" ".join)


@st.composite
def fragments(draw, fid: int, keyed: bool = False):
    key = polarity = None
    if keyed and draw(st.booleans()):
        key = draw(st.sampled_from(KEYS))
        polarity = draw(st.sampled_from(("+", "-")))
    return make_fragment(
        fid,
        draw(texts()),
        sectors=tuple(draw(st.sets(st.sampled_from(SECTORS), min_size=1, max_size=2))),
        anchor=draw(st.floats(0.0, 20.0, allow_nan=False)),
        persistence=draw(st.floats(0.11, 1.0, allow_nan=False)),
        created_at=draw(st.floats(0.0, 50.0, allow_nan=False)),
        key=key,
        polarity=polarity,
    )


@st.composite
def states(draw, min_frags: int = 0, max_frags: int = 6, keyed: bool = False):
    n = draw(st.integers(min_frags, max_frags))
    frags = [draw(fragments(i + 1, keyed=keyed)) for i in range(n)]
    clock = draw(st.floats(0.0, 100.0, allow_nan=False))
    return BeliefState(tuple(frags), clock)
