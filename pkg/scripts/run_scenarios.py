#!/usr/bin/env python3
"""Run every scenario file in scripts/scenarios/ and write one CSV each.

Usage: python scripts/run_scenarios.py [--out-dir results] [--threads N]
                                       [--only NAME ...]

The SNR sweeps at M=40 take a few minutes each; --only lets you pick a
subset (matched against the scenario file stem).
"""

import argparse
import sys
import time
from pathlib import Path

from rabsim.config import load_config
from rabsim.harness import run_experiment, write_csv

SCENARIO_DIR = Path(__file__).parent / "scenarios"


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out-dir", default="results")
    parser.add_argument("--threads", type=int, default=1)
    parser.add_argument("--only", nargs="*", default=None)
    args = parser.parse_args(argv)

    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    scenarios = sorted(SCENARIO_DIR.glob("*.json"))
    if args.only:
        scenarios = [s for s in scenarios
                     if any(pick in s.stem for pick in args.only)]
    if not scenarios:
        print("no scenarios selected", file=sys.stderr)
        return 2

    for path in scenarios:
        cfg = load_config(path)
        started = time.time()
        result = run_experiment(cfg, workers=args.threads)
        target = out_dir / f"{path.stem}.csv"
        write_csv(result, target)
        print(f"{path.stem}: {time.time() - started:5.1f}s -> {target}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
