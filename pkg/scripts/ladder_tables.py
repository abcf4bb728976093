#!/usr/bin/env python3
"""Print the causal ladder table of each flat gallery space at a coarse pitch.

  python scripts/ladder_tables.py [h]
"""
from __future__ import annotations

import sys
from pathlib import Path

root = Path(__file__).resolve().parent.parent
sys.path.insert(0, str(root))

import causal_horizon.env  # noqa: F401  (loads .env)
from causal_horizon.gallery import make_space
from causal_horizon.ladder import audit
from causal_horizon.report import render_ladder

SPACES = ("strip", "minkowski2", "punctured", "slit", "cylinder")


def main() -> None:
    h = float(sys.argv[1]) if len(sys.argv) > 1 else 1 / 8
    for name in SPACES:
        try:
            space = make_space(name, h)
            window = space.window(h)
            print(render_ladder(audit(space.oracle, window), window.meta()))
        except Exception as e:
            print(f"Error on {name}: {e}", file=sys.stderr)
            sys.exit(1)


if __name__ == "__main__":
    main()
