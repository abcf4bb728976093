#!/usr/bin/env python3
"""Run every demo in turn and print its verdicts. Run from project root:

  python scripts/run_demos.py
  CAUSAL_HORIZON_OUT=/tmp/ch python scripts/run_demos.py io-counterexample grapefruit
"""
from __future__ import annotations

import logging
import sys
from pathlib import Path

root = Path(__file__).resolve().parent.parent
sys.path.insert(0, str(root))

from causal_horizon import env
from causal_horizon.runner import DEMOS, run
from causal_horizon.schemas import ExperimentConfig


def main() -> None:
    logging.basicConfig(level=env.log_level())
    names = sys.argv[1:] or list(DEMOS)
    failed = []
    for name in names:
        print(f"--- {name}")
        try:
            result = run("demo", ExperimentConfig(demo=name, seed=env.default_seed(), workers=env.default_workers()))
        except Exception as e:
            print(f"Error: {e}", file=sys.stderr)
            sys.exit(1)
        for key, value in result.verdicts.items():
            print(f"  {key}: {value}")
        if result.message:
            print(f"  {result.message}")
        if not result.ok:
            failed.append(name)
    if failed:
        print(f"FAILED: {', '.join(failed)}")
        sys.exit(1)
    print("Done.")


if __name__ == "__main__":
    main()
