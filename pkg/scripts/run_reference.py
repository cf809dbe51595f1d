#!/usr/bin/env python
"""Run every reference config and collect the outputs under out/.

Usage: python scripts/run_reference.py [--only NAME] [--out DIR]

Each config gets the subcommand that exercises it best: the comparison for
the barrier regimes, a plain simulation for the reaction sanity check, and
the amplitude scan for the blow-up config.
"""

import argparse
import os
import sys
import time

from pme_react import cli

HERE = os.path.dirname(os.path.abspath(__file__))
CONFIGS = os.path.join(HERE, "..", "configs")

JOBS = (
    ("ge1a", "compare"),
    ("ge1b", "compare"),
    ("ge2", "compare"),
    ("blowup", "blow-up-scan"),
    ("reaction_check", "simulate"),
)


def main() -> int:
    ap = argparse.ArgumentParser()
    ap.add_argument("--only", default=None, help="run just this config (stem name)")
    ap.add_argument("--out", default=os.path.join(HERE, "..", "out"))
    args = ap.parse_args()

    worst = 0
    for stem, command in JOBS:
        if args.only is not None and stem != args.only:
            continue
        cfg = os.path.join(CONFIGS, stem + ".cfg")
        out_dir = os.path.join(args.out, stem)
        t0 = time.perf_counter()
        print(f"== {stem}: pme-react {command} ==", flush=True)
        code = cli.main([command, "--config", cfg, "--out", out_dir])
        print(f"   exit {code} in {time.perf_counter() - t0:.1f} s -> {out_dir}", flush=True)
        worst = max(worst, code)
    return worst


if __name__ == "__main__":
    sys.exit(main())
