"""Command-line front end.

Subcommands:

  run      execute a scenario timeline, report expectation checks,
           optionally write the canonical trace
  tower    build the abstraction tower for one declared axis and show
           its convergence profile
  gauge    probe two declared states for behavioral equivalence
  inspect  print a metric series (kappa, load, theta, velocity) from a trace
  verify   compare a trace against a golden trace with numeric tolerance

Exit codes: 0 success, 1 failed checks (expectations, inequivalence,
divergence, or warnings under --strict), 2 usage or load errors.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .core import IdAllocator
from .gauge import PROBE_SUITES, gauge_equivalent
from .simulator import (
    AXIS_ID_BASE,
    RUN_MODES,
    ScenarioError,
    SimulationRun,
    load_scenario,
    materialize_state,
)
from .tower import build_tower
from .trace import parse_trace, verify_golden


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="beliefsim",
        description="Deterministic belief-state engine and scenario simulator.",
    )
    sub = parser.add_subparsers(dest="cmd", required=True)

    p_run = sub.add_parser("run", help="execute a scenario timeline")
    p_run.add_argument("scenario", help="path to a scenario JSON file")
    p_run.add_argument("--trace", help="write the canonical JSONL trace here")
    p_run.add_argument(
        "--strict", action="store_true",
        help="treat engine warnings as failures",
    )
    p_run.add_argument("--seed", type=int, help="override the scenario seed")
    p_run.add_argument(
        "--mode", choices=RUN_MODES, default="live",
        help="initial run mode (simulation blocks outward actions)",
    )

    p_tower = sub.add_parser("tower", help="build one axis' abstraction tower")
    p_tower.add_argument("scenario")
    p_tower.add_argument("--axis", required=True, help="axis label to build")
    p_tower.add_argument("--max-k", type=int, help="override the step limit")

    p_gauge = sub.add_parser("gauge", help="probe two states for equivalence")
    p_gauge.add_argument("scenario")
    p_gauge.add_argument("--state-a", required=True)
    p_gauge.add_argument("--state-b", required=True)
    p_gauge.add_argument(
        "--suite", default="default", choices=sorted(PROBE_SUITES),
    )

    p_inspect = sub.add_parser("inspect", help="print a metric series")
    p_inspect.add_argument("trace")
    p_inspect.add_argument(
        "--metric", required=True,
        choices=("kappa", "load", "theta", "velocity"),
    )

    p_verify = sub.add_parser("verify", help="compare a trace to a golden")
    p_verify.add_argument("trace")
    p_verify.add_argument("golden")

    return parser


def _cmd_run(args: argparse.Namespace) -> int:
    scenario = load_scenario(args.scenario)
    run = SimulationRun(scenario, seed=args.seed, mode=args.mode)
    result = run.run()
    if args.trace:
        result.trace.write(args.trace)
    for outcome in result.assertions:
        tag = "PASS" if outcome.ok else "FAIL"
        label = outcome.spec.get("name") or outcome.spec.get("action") or ""
        print(f"[{tag}] {outcome.check} {label}: {outcome.detail}".rstrip())
    fired = sorted(set(result.fired))
    if fired:
        print(f"actions fired: {', '.join(fired)}")
    failed = len(result.failures)
    total = len(result.assertions)
    print(
        f"{result.scenario}: {total} check(s), {failed} failed, "
        f"{result.warnings} warning(s)"
    )
    if failed:
        return 1
    if args.strict and result.warnings:
        return 1
    return 0


def _cmd_tower(args: argparse.Namespace) -> int:
    scenario = load_scenario(args.scenario)
    spec = next(
        (s for s in scenario.axis_specs if s.get("label") == args.axis), None
    )
    if spec is None:
        known = [s.get("label") for s in scenario.axis_specs]
        raise ScenarioError(f"no axis {args.axis!r}; scenario declares {known}")
    seed = materialize_state(spec["seed"])
    max_k = args.max_k if args.max_k is not None else int(spec.get("max_k", 12))
    ids = IdAllocator(AXIS_ID_BASE)
    trajectory = build_tower(seed, max_k, scenario.config, ids)
    for i, level in enumerate(trajectory.levels):
        top = max((f.level for f in level.fragments), default=0)
        print(f"step {i}: {len(level.fragments)} fragment(s), top level {top}")
    status = "converged" if trajectory.converged else "not converged"
    print(
        f"{status} after {len(trajectory.levels) - 1} step(s); "
        f"final gap {trajectory.fixpoint_gap:.3e}"
    )
    return 0


def _cmd_gauge(args: argparse.Namespace) -> int:
    scenario = load_scenario(args.scenario)
    states = {}
    for side in (args.state_a, args.state_b):
        if side not in scenario.state_specs:
            known = sorted(scenario.state_specs)
            raise ScenarioError(f"no state {side!r}; scenario declares {known}")
        states[side] = materialize_state(scenario.state_specs[side])
    suite = PROBE_SUITES[args.suite]()
    verdict = gauge_equivalent(
        states[args.state_a], states[args.state_b], scenario.config, suite
    )
    for row in verdict.rows:
        mark = "agree" if row.matched else "DIFFER"
        print(f"{row.probe} [{row.kind}]: {mark}")
    if verdict.equivalent:
        print(f"equivalent under suite {suite.name!r} ({len(verdict.rows)} probes)")
        return 0
    print(f"inequivalent: witness probe {verdict.witness!r}")
    return 1


def _cmd_inspect(args: argparse.Namespace) -> int:
    _, events = parse_trace(Path(args.trace))
    for event in events:
        if event.kind != "meta":
            continue
        report = event.payload.get("report", {})
        if args.metric == "theta":
            for label, value in sorted(report.get("theta_by_axis", {}).items()):
                print(f"{event.tick:g}\t{label}\t{value:.9g}")
            continue
        key = {
            "kappa": "kappa_global",
            "load": "load",
            "velocity": "velocity",
        }[args.metric]
        if key in report:
            print(f"{event.tick:g}\t{report[key]:.9g}")
    return 0


def _cmd_verify(args: argparse.Namespace) -> int:
    result = verify_golden(Path(args.trace), Path(args.golden))
    if result.matched:
        print("MATCH")
        return 0
    print(f"DIVERGED: {result.divergence.describe()}")
    return 1


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:  # argparse uses 2 for usage errors
        return int(exc.code or 0)
    handlers = {
        "run": _cmd_run,
        "tower": _cmd_tower,
        "gauge": _cmd_gauge,
        "inspect": _cmd_inspect,
        "verify": _cmd_verify,
    }
    try:
        return handlers[args.cmd](args)
    except (ScenarioError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


def entry() -> None:
    sys.exit(main())


if __name__ == "__main__":
    sys.exit(main())
