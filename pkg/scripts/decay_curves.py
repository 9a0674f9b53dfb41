#!/usr/bin/env python3
"""Print persistence curves and prune horizons across anchor strengths.

Shows how anchoring stretches memory: a fragment at anchor 10 outlives an
unanchored one by an order of magnitude under the same decay constant.
"""

import argparse

from beliefsim.config import default_config
from beliefsim.core import Fragment
from beliefsim.dynamics import half_life


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument(
        "--anchors", type=float, nargs="+", default=[0.0, 1.0, 5.0, 10.0, 20.0]
    )
    parser.add_argument(
        "--checkpoints", type=int, nargs="+", default=[20, 100, 250, 500]
    )
    args = parser.parse_args()

    cfg = default_config()
    header = "anchor   rate        " + "".join(f"t={t:<8}" for t in args.checkpoints)
    print(header + "prune at")
    print("-" * len(header + "prune at"))
    import math

    for anchor in args.anchors:
        frag = Fragment(
            id=1, text="probe", sectors=frozenset({"perc"}),
            anchor=anchor, persistence=1.0, created_at=0.0, origin="observed",
        )
        rate = cfg.decay_rate(anchor)
        cells = "".join(
            f"{math.exp(-rate * t):<10.4f}" for t in args.checkpoints
        )
        print(f"{anchor:<8g} {rate:<11.5f} {cells}{half_life(frag, cfg):8.1f}")


if __name__ == "__main__":
    main()
