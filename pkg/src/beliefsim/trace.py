"""Run traces: canonical JSONL emission, parsing, and golden comparison.

Every run writes one header line followed by one line per event.  Numbers are
canonicalized (9 significant digits, negative zero collapsed) before
serialization and keys are sorted, so identical runs produce byte-identical
files on any platform — which is what makes golden-trace testing meaningful.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Iterable, Iterator

FORMAT_TAG = "belief-trace/1"

EVENT_KINDS = frozenset(
    {
        "ingest",
        "assimilate",
        "nullify_prune",
        "drift",
        "query",
        "retrieve",
        "integrate",
        "meta",
        "regulate_action",
        "effort_skip",
        "action_decision",
        "correction",
        "warning",
        "assertion_result",
    }
)

FLOAT_TOL = 1e-9


def _canon_float(x: float) -> float:
    if not math.isfinite(x):
        raise ValueError(f"non-finite value {x!r} cannot enter a trace")
    if x == 0.0:
        return 0.0
    return float(f"{x:.9g}")


def _canonicalize(obj: Any) -> Any:
    if isinstance(obj, bool) or obj is None or isinstance(obj, (int, str)):
        return obj
    if isinstance(obj, float):
        return _canon_float(obj)
    if isinstance(obj, dict):
        return {str(k): _canonicalize(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_canonicalize(v) for v in obj]
    raise TypeError(f"cannot serialize {type(obj).__name__} into a trace")


def canonical_json(obj: Any) -> str:
    """Deterministic one-line JSON: sorted keys, compact, canonical floats."""
    return json.dumps(_canonicalize(obj), sort_keys=True, separators=(",", ":"))


@dataclass(frozen=True)
class TraceEvent:
    seq: int
    tick: float
    kind: str
    payload: dict

    def __post_init__(self) -> None:
        if self.kind not in EVENT_KINDS:
            raise ValueError(f"unknown trace event kind {self.kind!r}")

    def to_dict(self) -> dict:
        return {
            "seq": self.seq,
            "tick": self.tick,
            "kind": self.kind,
            "payload": self.payload,
        }


@dataclass
class TraceLog:
    """Accumulates one run's header and ordered events."""

    header: dict
    events: list[TraceEvent] = field(default_factory=list)
    _seq: int = 0

    def emit(self, kind: str, tick: float, payload: dict) -> TraceEvent:
        event = TraceEvent(seq=self._seq, tick=tick, kind=kind, payload=payload)
        self._seq += 1
        self.events.append(event)
        return event

    def lines(self) -> Iterator[str]:
        yield canonical_json({"header": self.header})
        for event in self.events:
            yield canonical_json(event.to_dict())

    def render(self) -> str:
        return "\n".join(self.lines()) + "\n"

    def write(self, path: str | Path) -> None:
        Path(path).write_text(self.render(), encoding="utf-8")


def make_header(
    scenario: str, seed: int, mode: str, config_echo: dict
) -> dict:
    return {
        "scenario": scenario,
        "seed": seed,
        "mode": mode,
        "config": config_echo,
        "format": FORMAT_TAG,
    }


def parse_trace(source: str | Path | Iterable[str]) -> tuple[dict, list[TraceEvent]]:
    """Read a trace back; inverse of TraceLog.render for well-formed files."""
    if isinstance(source, (str, Path)):
        lines = Path(source).read_text(encoding="utf-8").splitlines()
    else:
        lines = [ln.rstrip("\n") for ln in source]
    lines = [ln for ln in lines if ln.strip()]
    if not lines:
        raise ValueError("empty trace: missing header line")
    first = json.loads(lines[0])
    if "header" not in first:
        raise ValueError("first trace line must be the header object")
    header = first["header"]
    events = []
    for i, line in enumerate(lines[1:], start=2):
        raw = json.loads(line)
        try:
            events.append(
                TraceEvent(
                    seq=raw["seq"],
                    tick=raw["tick"],
                    kind=raw["kind"],
                    payload=raw["payload"],
                )
            )
        except (KeyError, ValueError) as exc:
            raise ValueError(f"trace line {i}: {exc}") from exc
    return header, events


# --------------------------------------------------------------------------
# Golden comparison
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class Divergence:
    line: int
    path: str
    actual: Any
    expected: Any

    def describe(self) -> str:
        return (
            f"line {self.line}, at {self.path or '$'}: "
            f"actual={self.actual!r} expected={self.expected!r}"
        )


@dataclass(frozen=True)
class VerifyResult:
    matched: bool
    divergence: Divergence | None = None


def _compare(actual: Any, expected: Any, path: str) -> tuple[bool, str, Any, Any]:
    if isinstance(actual, bool) or isinstance(expected, bool):
        # true != 1: booleans only ever match other booleans.
        ok = isinstance(actual, bool) and isinstance(expected, bool) and actual == expected
        return (ok, path, actual, expected)
    if isinstance(actual, (int, float)) and isinstance(expected, (int, float)):
        ok = abs(float(actual) - float(expected)) <= FLOAT_TOL
        return (ok, path, actual, expected)
    if isinstance(actual, dict) and isinstance(expected, dict):
        if set(actual) != set(expected):
            missing = sorted(set(actual) ^ set(expected))
            return (False, f"{path}.{missing[0]}", actual.get(missing[0]), expected.get(missing[0]))
        for key in sorted(actual):
            ok, where, a, e = _compare(actual[key], expected[key], f"{path}.{key}")
            if not ok:
                return (False, where, a, e)
        return (True, path, actual, expected)
    if isinstance(actual, list) and isinstance(expected, list):
        if len(actual) != len(expected):
            return (False, f"{path}.length", len(actual), len(expected))
        for i, (a_item, e_item) in enumerate(zip(actual, expected)):
            ok, where, a, e = _compare(a_item, e_item, f"{path}[{i}]")
            if not ok:
                return (False, where, a, e)
        return (True, path, actual, expected)
    return (actual == expected, path, actual, expected)


def verify_golden(
    actual: str | Path | Iterable[str],
    golden: str | Path | Iterable[str],
) -> VerifyResult:
    """Structural comparison with per-number tolerance; first divergence wins.

    A length mismatch is reported at the first line the shorter side lacks,
    so a truncated run points at exactly where it stopped.
    """

    def load_lines(source):
        if isinstance(source, (str, Path)):
            text = Path(source).read_text(encoding="utf-8")
            return [ln for ln in text.splitlines() if ln.strip()]
        return [ln.rstrip("\n") for ln in source if ln.strip()]

    actual_lines = load_lines(actual)
    golden_lines = load_lines(golden)
    for i, (a_line, g_line) in enumerate(zip(actual_lines, golden_lines), start=1):
        a_obj = json.loads(a_line)
        g_obj = json.loads(g_line)
        ok, where, a, e = _compare(a_obj, g_obj, "")
        if not ok:
            return VerifyResult(False, Divergence(line=i, path=where, actual=a, expected=e))
    if len(actual_lines) != len(golden_lines):
        short = min(len(actual_lines), len(golden_lines))
        return VerifyResult(
            False,
            Divergence(
                line=short + 1,
                path=".length",
                actual=len(actual_lines),
                expected=len(golden_lines),
            ),
        )
    return VerifyResult(True, None)


__all__ = [
    "Divergence",
    "EVENT_KINDS",
    "FLOAT_TOL",
    "FORMAT_TAG",
    "TraceEvent",
    "TraceLog",
    "VerifyResult",
    "canonical_json",
    "make_header",
    "parse_trace",
    "verify_golden",
]
