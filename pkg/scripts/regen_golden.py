#!/usr/bin/env python3
"""Regenerate the frozen golden trace for the decay scenario.

Run after any intentional change to trace semantics, then review the diff:
the golden file is the contract that replays must reproduce byte-for-byte.
"""

from pathlib import Path

from beliefsim.simulator import run_scenario

ROOT = Path(__file__).resolve().parent.parent
SCENARIO = ROOT / "scenarios" / "sensor_decay.json"
GOLDEN = ROOT / "scenarios" / "golden" / "sensor_decay.trace.jsonl"


def main() -> None:
    result = run_scenario(SCENARIO)
    if not result.ok:
        details = [a.detail for a in result.failures]
        raise SystemExit(f"scenario checks failed; refusing to freeze: {details}")
    GOLDEN.parent.mkdir(parents=True, exist_ok=True)
    result.trace.write(GOLDEN)
    print(f"wrote {GOLDEN.relative_to(ROOT)} ({len(result.trace.events)} events)")


if __name__ == "__main__":
    main()
