"""Scenario-driven simulation runs.

A scenario file is one JSON object declaring the world (config overrides,
long-term store seeds, elaboration rules, drift lexicon, orientation axes,
action basins) and a timeline of events: observations, commands, tick blocks,
run-mode switches, and expectation checks.  The run executes the timeline
deterministically and writes a canonical trace.

Each tick:

1. the op-rate window rolls and the state introspects itself (free);
2. breaches are written into the reflective sector (monitors budget);
3. the regulation decision is taken (free) and applied (its class budget) —
   both 2 and 3 spend from the *previous* tick's allocations;
4. effort is re-allocated from the fresh report;
5. at most one memory cycle runs: query, retrieve, integrate (memory budget,
   three units up front, cue signatures never reissued);
6. a vacuum state drifts one lexicon word in (rest budget);
7. one unit of time passes: active and store decay, prunes are logged (free);
8. basins are evaluated and resolved to at most one fired action per tick
   (planning budget).

Observations and commands sit between ticks, advance nothing, and cost
nothing; they are the world pushing in, not the engine working.
"""

from __future__ import annotations

import json
import random
from collections import deque
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Mapping, Sequence

from .config import ParameterConfig, config_from_dict, default_config
from .core import (
    BeliefState,
    Fragment,
    IdAllocator,
    encode_observation,
    fragment_from_spec,
    tokenize,
)
from .dynamics import (
    ElaborationRule,
    annihilate_sector,
    assimilate,
    drift,
    nullify,
    nullify_sector,
)
from .execution import ActionBasin, Clause, GateRule, evaluate_action, resolve_actions
from .geometry import realign
from .memory import generate_query, integrate_retrieved, retrieve
from .regulation import (
    EffortLedger,
    allocate_effort,
    coherence,
    introspect,
    meta_assimilate,
    regulate,
    uniform_ledger,
)
from .tower import EpistemicAxis, build_tower, derive_axis
from .trace import TraceLog, make_header

RUN_MODES = ("live", "simulation")

TIMELINE_EVENTS = ("observe", "command", "tick", "set_mode", "expect")

ASSERTION_CHECKS = (
    "fragment_present",
    "fragment_absent",
    "persistence",
    "anchor",
    "kappa",
    "is_vacuum",
    "action_fired",
    "action_not_fired",
)

TRIGGER_PRECEDENCE = ("goal", "coherence", "associative")

# Ops that count toward the load rate term, over the sliding window.
OP_RATE_KINDS = frozenset(
    {
        "ingest",
        "assimilate",
        "nullify_prune",
        "drift",
        "query",
        "retrieve",
        "integrate",
        "regulate_action",
        "correction",
    }
)

COMMAND_ANCHOR = 5.0
MEMORY_CYCLE_COST = 3.0
AXIS_ID_BASE = 1_000_000

_SCENARIO_KEYS = frozenset(
    {"name", "config", "memory", "rules", "lexicon", "axes", "basins", "timeline", "states"}
)
_CLAUSE_FIELDS = ("kind", "sector", "minimum", "level", "tolerance", "token")


class ScenarioError(ValueError):
    """A scenario file that cannot be executed as written."""


@dataclass(frozen=True)
class Scenario:
    name: str
    config: ParameterConfig
    store_specs: tuple[Mapping[str, Any], ...]
    rules: tuple[ElaborationRule, ...]
    rule_names: tuple[str | None, ...]
    lexicon: tuple[str, ...]
    axis_specs: tuple[Mapping[str, Any], ...]
    basins: tuple[ActionBasin, ...]
    timeline: tuple[Mapping[str, Any], ...]
    state_specs: Mapping[str, tuple[Mapping[str, Any], ...]]


def _parse_clause(raw: Mapping[str, Any], where: str) -> Clause:
    extra = set(raw) - set(_CLAUSE_FIELDS)
    if extra:
        raise ScenarioError(f"{where}: unknown clause fields {sorted(extra)}")
    try:
        return Clause(**{k: raw[k] for k in _CLAUSE_FIELDS if k in raw})
    except (TypeError, ValueError) as exc:
        raise ScenarioError(f"{where}: {exc}") from exc


def _parse_basin(raw: Mapping[str, Any], index: int) -> ActionBasin:
    where = f"basins[{index}]"
    try:
        clauses = tuple(
            _parse_clause(c, f"{where}.clauses[{i}]")
            for i, c in enumerate(raw.get("clauses", ()))
        )
        suppressors = tuple(
            _parse_clause(c, f"{where}.suppressors[{i}]")
            for i, c in enumerate(raw.get("suppressors", ()))
        )
        gates = tuple(
            GateRule(pattern=g["pattern"], action=g.get("action", "approve"))
            for g in raw.get("gate_policy", ())
        )
        return ActionBasin(
            name=str(raw.get("name", "")),
            clauses=clauses,
            tau=float(raw.get("tau", 0.5)),
            suppressors=suppressors,
            gate_policy=gates,
        )
    except ScenarioError:
        raise
    except (KeyError, TypeError, ValueError) as exc:
        raise ScenarioError(f"{where}: {exc}") from exc


def _validate_timeline(timeline: Sequence[Mapping[str, Any]]) -> None:
    for i, entry in enumerate(timeline):
        kind = entry.get("event")
        if kind not in TIMELINE_EVENTS:
            raise ScenarioError(f"timeline[{i}]: unknown event {kind!r}")
        if kind == "observe" and not entry.get("specs"):
            raise ScenarioError(f"timeline[{i}]: observe needs non-empty specs")
        if kind == "command" and not tokenize(str(entry.get("text", ""))):
            raise ScenarioError(f"timeline[{i}]: command needs text")
        if kind == "tick":
            n = entry.get("n", 1)
            if not isinstance(n, int) or n < 1:
                raise ScenarioError(f"timeline[{i}]: tick n must be an int >= 1")
        if kind == "set_mode" and entry.get("mode") not in RUN_MODES:
            raise ScenarioError(f"timeline[{i}]: mode must be one of {RUN_MODES}")
        if kind == "expect":
            for j, a in enumerate(entry.get("assertions", ())):
                if a.get("check") not in ASSERTION_CHECKS:
                    raise ScenarioError(
                        f"timeline[{i}].assertions[{j}]: "
                        f"unknown check {a.get('check')!r}"
                    )


def load_scenario(path: str | Path) -> Scenario:
    path = Path(path)
    try:
        raw = json.loads(path.read_text(encoding="utf-8"))
    except OSError as exc:
        raise ScenarioError(f"cannot read scenario {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ScenarioError(f"scenario {path} is not valid JSON: {exc}") from exc
    if not isinstance(raw, dict):
        raise ScenarioError("scenario root must be a JSON object")
    extra = set(raw) - _SCENARIO_KEYS
    if extra:
        raise ScenarioError(f"unknown scenario sections {sorted(extra)}")

    try:
        config = config_from_dict(raw.get("config", {}))
    except ValueError as exc:
        raise ScenarioError(f"config: {exc}") from exc

    rules = []
    rule_names = []
    for i, r in enumerate(raw.get("rules", ())):
        trigger = r.get("trigger")
        emit = r.get("emit")
        if not trigger or not isinstance(emit, dict) or not tokenize(str(emit.get("text", ""))):
            raise ScenarioError(f"rules[{i}]: needs trigger and emit.text")
        rules.append(ElaborationRule(trigger=str(trigger), emit=emit))
        rule_names.append(emit.get("name"))

    basins = tuple(_parse_basin(b, i) for i, b in enumerate(raw.get("basins", ())))
    seen = set()
    for b in basins:
        if b.name in seen:
            raise ScenarioError(f"duplicate basin name {b.name!r}")
        seen.add(b.name)

    timeline = tuple(raw.get("timeline", ()))
    _validate_timeline(timeline)

    states = {
        str(k): tuple(v) for k, v in raw.get("states", {}).items()
    }

    return Scenario(
        name=str(raw.get("name", path.stem)),
        config=config,
        store_specs=tuple(raw.get("memory", ())),
        rules=tuple(rules),
        rule_names=tuple(rule_names),
        lexicon=tuple(str(w) for w in raw.get("lexicon", ())),
        axis_specs=tuple(raw.get("axes", ())),
        basins=basins,
        timeline=timeline,
        state_specs=states,
    )


def materialize_state(
    specs: Sequence[Mapping[str, Any]], clock: float = 0.0
) -> BeliefState:
    """Build a standalone state from fragment specs (own id space)."""
    ids = IdAllocator(1)
    frags = [fragment_from_spec(s, ids.next(), clock) for s in specs]
    return BeliefState(tuple(frags), clock)


def build_axes(
    scenario: Scenario, config: ParameterConfig
) -> dict[str, EpistemicAxis]:
    """Derive every declared axis by running its seed to a fixed point.

    Axis seeds live in their own id namespace so tower bookkeeping can never
    collide with run fragments.
    """
    axes: dict[str, EpistemicAxis] = {}
    ids = IdAllocator(AXIS_ID_BASE)
    for i, spec in enumerate(scenario.axis_specs):
        label = spec.get("label")
        seed_specs = spec.get("seed")
        if not label or not seed_specs:
            raise ScenarioError(f"axes[{i}]: needs label and seed fragments")
        if label in axes:
            raise ScenarioError(f"duplicate axis label {label!r}")
        frags = [fragment_from_spec(s, ids.next(), 0.0) for s in seed_specs]
        seed = BeliefState(tuple(frags), 0.0)
        try:
            trajectory = build_tower(seed, int(spec.get("max_k", 12)), config, ids)
            axes[label] = derive_axis(
                trajectory, label, config, null_seed=bool(spec.get("null_seed", False))
            )
        except ValueError as exc:
            raise ScenarioError(f"axes[{i}] ({label}): {exc}") from exc
    return axes


@dataclass(frozen=True)
class AssertionOutcome:
    check: str
    ok: bool
    detail: str
    spec: Mapping[str, Any]


@dataclass
class RunResult:
    scenario: str
    seed: int
    mode: str
    assertions: list[AssertionOutcome] = field(default_factory=list)
    fired: list[str] = field(default_factory=list)
    warnings: int = 0
    trace: TraceLog | None = None
    active: BeliefState | None = None
    store: BeliefState | None = None

    @property
    def failures(self) -> list[AssertionOutcome]:
        return [a for a in self.assertions if not a.ok]

    @property
    def ok(self) -> bool:
        return not self.failures


class SimulationRun:
    """One deterministic execution of a scenario timeline."""

    def __init__(
        self,
        scenario: Scenario,
        seed: int | None = None,
        mode: str = "live",
    ):
        if mode not in RUN_MODES:
            raise ScenarioError(f"mode must be one of {RUN_MODES}, got {mode!r}")
        self.scenario = scenario
        self.config = scenario.config
        self.seed = scenario.config.seed if seed is None else int(seed)
        self.mode = mode
        self.rng = random.Random(self.seed)
        self.ids = IdAllocator(1)
        self.names: dict[str, int] = {}

        store_frags = []
        for spec in scenario.store_specs:
            frag = fragment_from_spec(spec, self.ids.next(), 0.0)
            store_frags.append(frag)
            if spec.get("name"):
                self.names[str(spec["name"])] = frag.id
        self.store = BeliefState(tuple(store_frags), 0.0)
        self.active = BeliefState((), 0.0)
        self.axes = build_axes(scenario, self.config)

        self.trace = TraceLog(
            make_header(scenario.name, self.seed, mode, self.config.to_dict())
        )
        self.ledger: EffortLedger = uniform_ledger(self.config)
        self._prev_active: BeliefState | None = None
        self._prev_readiness: dict[str, float] = {b.name: 0.0 for b in scenario.basins}
        self._issued_cues: set[tuple] = set()
        self._fired_ever: list[str] = []
        self._kappa_streak = 0
        self._op_buckets: deque[int] = deque(maxlen=self.config.window)
        self._pending_ops = 0
        self._warnings = 0
        self._assertions: list[AssertionOutcome] = []

    # -- plumbing ----------------------------------------------------------

    def _emit(self, kind: str, payload: dict) -> None:
        self.trace.emit(kind, self.active.clock, payload)
        if kind in OP_RATE_KINDS:
            self._pending_ops += 1
        if kind == "warning":
            self._warnings += 1

    def _skip(self, op: str, cls: str, needed: float) -> None:
        self._emit(
            "effort_skip",
            {
                "op": op,
                "class": cls,
                "needed": needed,
                "available": self.ledger.available(cls),
            },
        )

    def _goals_present(self) -> bool:
        marker = self.config.goal_marker
        return any(f.text.lower().startswith(marker) for f in self.active.fragments)

    def _register_rule_names(self, elaborated: Sequence[int]) -> None:
        if not elaborated:
            return
        emitted = [self.active.get(fid) for fid in elaborated]
        for name, rule in zip(self.scenario.rule_names, self.scenario.rules):
            if not name:
                continue
            want = tokenize(str(rule.emit.get("text", "")))
            for frag in emitted:
                if frag is not None and frag.tokens == want:
                    self.names[str(name)] = frag.id
                    break

    # -- timeline events ---------------------------------------------------

    def _do_observe(self, entry: Mapping[str, Any]) -> None:
        specs = entry["specs"]
        observation = encode_observation(specs, self.active.clock, self.ids)
        for spec, frag in zip(specs, observation.fragments):
            if spec.get("name"):
                self.names[str(spec["name"])] = frag.id
        self._emit(
            "ingest",
            {
                "ids": [f.id for f in observation.fragments],
                "texts": [f.text for f in observation.fragments],
                "command": False,
            },
        )
        mode = entry.get("mode", "auto")
        self.active, report = assimilate(
            self.active, observation, self.config, self.ids,
            mode=mode, rules=self.scenario.rules,
        )
        self._emit("assimilate", {"report": report.to_dict()})
        self._register_rule_names(report.elaborated)

    def _do_command(self, entry: Mapping[str, Any]) -> None:
        frag = Fragment(
            id=self.ids.next(),
            text=str(entry["text"]),
            sectors=frozenset({"task"}),
            level=0,
            anchor=float(entry.get("anchor", COMMAND_ANCHOR)),
            persistence=1.0,
            created_at=self.active.clock,
            origin="observed",
        )
        if entry.get("name"):
            self.names[str(entry["name"])] = frag.id
        self._emit("ingest", {"ids": [frag.id], "texts": [frag.text], "command": True})
        self.active, report = assimilate(
            self.active,
            BeliefState((frag,), self.active.clock),
            self.config,
            self.ids,
            mode="auto",
            rules=self.scenario.rules,
        )
        self._emit("assimilate", {"report": report.to_dict()})
        self._register_rule_names(report.elaborated)

    # -- the tick ----------------------------------------------------------

    def _apply_regulation(self, report) -> None:
        decision = regulate(report, self.active, self.config, self._kappa_streak)
        if decision.kind == "none":
            return
        cls = {
            "annihilate_sector": "corrective",
            "corrective_assimilation": "corrective",
            "accelerate_nullify": "nullify",
            "realign": "corrective",
        }[decision.kind]
        if not self.ledger.charge(cls, 1.0):
            self._skip(decision.kind, cls, 1.0)
            return
        removed: list[int] = []
        if decision.kind == "annihilate_sector":
            before = set(self.active.ids())
            self.active = annihilate_sector(self.active, decision.target)
            removed = sorted(before - set(self.active.ids()))
        elif decision.kind == "corrective_assimilation":
            self.active, rep = assimilate(
                self.active,
                BeliefState((), self.active.clock),
                self.config,
                self.ids,
                mode="corr",
            )
            removed = sorted(rep.retracted)
            self._emit(
                "correction",
                {"retracted": list(removed), "conflicts": rep.conflicts_found},
            )
        elif decision.kind == "accelerate_nullify":
            before = set(self.active.ids())
            self.active = nullify_sector(
                self.active, decision.target, self.config.nullify_boost, self.config
            )
            removed = sorted(before - set(self.active.ids()))
        elif decision.kind == "realign":
            outcome = realign(self.active, self.axes[decision.target], self.config)
            self.active = outcome.state
            removed = sorted(outcome.removed)
            if outcome.warned:
                self._emit(
                    "warning",
                    {"op": "realign", "message": "still drifting after realignment"},
                )
        self._emit(
            "regulate_action",
            {"decision": decision.to_dict(), "removed": list(removed)},
        )

    def _memory_cycle(self) -> None:
        cue = None
        for trigger in TRIGGER_PRECEDENCE:
            candidate = generate_query(self.active, trigger, self.config)
            if candidate is not None and candidate.signature() not in self._issued_cues:
                cue = candidate
                break
        if cue is None:
            return
        if not self.ledger.can_afford("memory", MEMORY_CYCLE_COST):
            self._skip("memory_cycle", "memory", MEMORY_CYCLE_COST)
            return
        self.ledger.charge("memory", 1.0)
        self._issued_cues.add(cue.signature())
        self._emit("query", {"cue": cue.to_dict()})
        found = retrieve(self.store, cue, self.config)
        self.ledger.charge("memory", 1.0)
        self._emit(
            "retrieve",
            {"cue_kind": cue.kind, "ids": [f.id for f in found.fragments]},
        )
        if found.is_vacuum:
            return
        self.ledger.charge("memory", 1.0)
        self.active, self.store, report = integrate_retrieved(
            self.active, found, self.store, self.config, self.ids,
            rules=self.scenario.rules,
        )
        self._emit(
            "integrate",
            {
                "report": report.to_dict(),
                "copied": [f.id for f in found.fragments],
            },
        )

    def _tick(self) -> None:
        # 1. roll the op window and introspect (free).
        self._op_buckets.append(self._pending_ops)
        self._pending_ops = 0
        rate = float(sum(self._op_buckets))
        report = introspect(
            self.active, self._prev_active, self.axes, self.config, rate
        )
        self._prev_active = self.active

        breach = report.kappa_global < self.config.kappa_crit or any(
            v < self.config.kappa_crit for v in report.kappa_by_sector.values()
        )
        self._kappa_streak = self._kappa_streak + 1 if breach else 0

        # 2. write breach reflections (monitors, previous allocations).
        if breach or report.load > self.config.l_max or any(
            t > self.config.tau_theta for t in report.theta_by_axis.values()
        ):
            if self.ledger.charge("monitors", 1.0):
                self.active, _, warnings = meta_assimilate(
                    self.active, report, self.config, self.ids
                )
                for message in warnings:
                    self._emit("warning", {"op": "meta", "message": message})
            else:
                self._skip("meta", "monitors", 1.0)

        # 3. regulation decision and application (previous allocations).
        self._apply_regulation(report)

        # 4. re-allocate effort and log the introspection.
        self.ledger = allocate_effort(report, self._goals_present(), self.config)
        self._emit(
            "meta",
            {
                "report": report.to_dict(),
                "allocations": dict(self.ledger.allocations),
                "breach_streak": self._kappa_streak,
            },
        )

        # 5. memory cycle (memory budget).
        self._memory_cycle()

        # 6. vacuum drift (rest budget).
        if self.active.is_vacuum and self.scenario.lexicon:
            if self.ledger.charge("rest", 1.0):
                self.active, _ = drift(
                    self.active, self.scenario.lexicon, self.rng, self.ids
                )
                newest = self.active.fragments[-1]
                self._emit("drift", {"id": newest.id, "text": newest.text})
            else:
                self._skip("drift", "rest", 1.0)

        # 7. one unit of time passes (free); prunes are logged post-advance.
        before_active = set(self.active.ids())
        before_store = set(self.store.ids())
        self.active = nullify(self.active, 1.0, self.config)
        self.store = nullify(self.store, 1.0, self.config)
        pruned_active = sorted(before_active - set(self.active.ids()))
        pruned_store = sorted(before_store - set(self.store.ids()))
        if pruned_active or pruned_store:
            self._emit(
                "nullify_prune",
                {"active": pruned_active, "store": pruned_store},
            )

        # 8. basin evaluation and resolution (planning budget).
        if self.scenario.basins:
            if self.ledger.charge("planning", 1.0):
                decisions = [
                    evaluate_action(
                        b, self.active, self._prev_readiness[b.name], self.mode
                    )
                    for b in self.scenario.basins
                ]
                for d in resolve_actions(decisions):
                    self._emit("action_decision", d.to_dict())
                    self._prev_readiness[d.action] = d.readiness
                    if d.verdict == "fired":
                        self._fired_ever.append(d.action)
            else:
                self._skip("basins", "planning", 1.0)

    # -- assertions --------------------------------------------------------

    def _check(self, spec: Mapping[str, Any]) -> AssertionOutcome:
        check = spec["check"]
        name = spec.get("name")
        frag = None
        if name is not None and name in self.names:
            frag = self.active.get(self.names[name])

        def out(ok: bool, detail: str) -> AssertionOutcome:
            return AssertionOutcome(check=check, ok=ok, detail=detail, spec=spec)

        if check == "fragment_present":
            if name not in self.names:
                return out(False, f"name {name!r} never registered")
            return out(frag is not None, f"id {self.names[name]} "
                       + ("present" if frag else "absent"))
        if check == "fragment_absent":
            if name not in self.names:
                return out(True, f"name {name!r} never registered")
            return out(frag is None, f"id {self.names[name]} "
                       + ("absent" if frag is None else "present"))
        if check == "persistence":
            if frag is None:
                return out(False, f"{name!r} not in active state")
            tol = float(spec.get("tol", 1e-6))
            want = float(spec["value"])
            ok = abs(frag.persistence - want) <= tol
            return out(ok, f"persistence {frag.persistence:.6f} vs {want} ± {tol}")
        if check == "anchor":
            if frag is None:
                return out(False, f"{name!r} not in active state")
            tol = float(spec.get("tol", 1e-9))
            want = float(spec["value"])
            ok = abs(frag.anchor - want) <= tol
            return out(ok, f"anchor {frag.anchor:.6f} vs {want}")
        if check == "kappa":
            sector = spec.get("sector")
            value = coherence(self.active, sector)
            tol = float(spec.get("tol", 1e-6))
            want = float(spec["value"])
            ok = abs(value - want) <= tol
            where = f" in {sector}" if sector else ""
            return out(ok, f"kappa{where} {value:.6f} vs {want} ± {tol}")
        if check == "is_vacuum":
            want = bool(spec.get("value", True))
            return out(self.active.is_vacuum == want,
                       f"vacuum={self.active.is_vacuum}")
        if check == "action_fired":
            action = spec.get("action")
            return out(action in self._fired_ever,
                       f"fired so far: {sorted(set(self._fired_ever))}")
        if check == "action_not_fired":
            action = spec.get("action")
            return out(action not in self._fired_ever,
                       f"fired so far: {sorted(set(self._fired_ever))}")
        return out(False, f"unknown check {check!r}")

    def _do_expect(self, entry: Mapping[str, Any]) -> None:
        for spec in entry.get("assertions", ()):
            outcome = self._check(spec)
            self._assertions.append(outcome)
            self._emit(
                "assertion_result",
                {
                    "check": outcome.check,
                    "ok": outcome.ok,
                    "detail": outcome.detail,
                    "spec": dict(spec),
                },
            )

    # -- driver ------------------------------------------------------------

    def run(self) -> RunResult:
        for entry in self.scenario.timeline:
            kind = entry["event"]
            if kind == "observe":
                self._do_observe(entry)
            elif kind == "command":
                self._do_command(entry)
            elif kind == "tick":
                for _ in range(int(entry.get("n", 1))):
                    self._tick()
            elif kind == "set_mode":
                self.mode = entry["mode"]
            elif kind == "expect":
                self._do_expect(entry)
        return RunResult(
            scenario=self.scenario.name,
            seed=self.seed,
            mode=self.mode,
            assertions=list(self._assertions),
            fired=list(self._fired_ever),
            warnings=self._warnings,
            trace=self.trace,
            active=self.active,
            store=self.store,
        )


def run_scenario(
    path: str | Path,
    seed: int | None = None,
    mode: str = "live",
) -> RunResult:
    """Load and execute in one call; the common entry point for tools."""
    scenario = load_scenario(path)
    return SimulationRun(scenario, seed=seed, mode=mode).run()


__all__ = [
    "ASSERTION_CHECKS",
    "AXIS_ID_BASE",
    "AssertionOutcome",
    "COMMAND_ANCHOR",
    "MEMORY_CYCLE_COST",
    "OP_RATE_KINDS",
    "RUN_MODES",
    "RunResult",
    "Scenario",
    "ScenarioError",
    "SimulationRun",
    "TIMELINE_EVENTS",
    "TRIGGER_PRECEDENCE",
    "build_axes",
    "load_scenario",
    "materialize_state",
    "run_scenario",
]
