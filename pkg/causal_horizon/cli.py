"""Command-line front end: python -m causal_horizon <subcommand> [flags]."""
from __future__ import annotations

import argparse
import logging
import sys

from pydantic import ValidationError

from causal_horizon import env
from causal_horizon.runner import DEMOS, SUBCOMMANDS, listing, run
from causal_horizon.schemas import ExperimentConfig

logger = logging.getLogger(__name__)


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="causal_horizon",
        description="Future causal completions, limit operators and the causal ladder on sampled spacetimes.",
    )
    p.add_argument("subcommand", nargs="?", choices=SUBCOMMANDS)
    p.add_argument("demo", nargs="?", help=f"demo name for the demo subcommand: {', '.join(DEMOS)}")
    p.add_argument("--space", default="strip", help="gallery space (see --list)")
    p.add_argument("--spec", help="family or warp spec JSON")
    p.add_argument("--input", help="explicit relation or poset JSON")
    p.add_argument("--h", type=float, default=1 / 32, help="grid pitch")
    p.add_argument("--window", type=float, nargs="+", help="window box lo0 hi0 lo1 hi1 ...")
    p.add_argument("--tol", type=float, default=1e-3, help="metric tolerance")
    p.add_argument("--depth", type=int, default=64, help="chain evaluation depth")
    p.add_argument("--horizon", type=int, default=64, help="index horizon for set limits")
    p.add_argument("--seed", type=int, default=None, help="random seed (default from CAUSAL_HORIZON_SEED)")
    p.add_argument("--out", default="out", help="output directory (CAUSAL_HORIZON_OUT overrides)")
    p.add_argument("--workers", type=int, default=None, help="thread pool size (default from CAUSAL_HORIZON_WORKERS)")
    p.add_argument("--list", action="store_true", help="list gallery spaces and demos, then exit")
    return p


def config_from_args(args: argparse.Namespace) -> ExperimentConfig:
    return ExperimentConfig(
        space=args.space,
        spec=args.spec,
        input=args.input,
        demo=args.demo,
        h=args.h,
        window=args.window,
        tol=args.tol,
        depth=args.depth,
        horizon=args.horizon,
        seed=env.default_seed() if args.seed is None else args.seed,
        out=args.out,
        workers=env.default_workers() if args.workers is None else args.workers,
    )


def main(argv: list[str] | None = None) -> int:
    logging.basicConfig(level=env.log_level(), format="%(asctime)s %(levelname)s %(name)s: %(message)s")
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.list:
        print(listing())
        return 0
    if args.subcommand is None:
        parser.print_usage(sys.stderr)
        return 2
    try:
        config = config_from_args(args)
    except (ValidationError, ValueError) as e:
        print(f"Error: {e}", file=sys.stderr)
        return 2
    result = run(args.subcommand, config)
    print(f"{args.subcommand}: {'ok' if result.ok else 'FAILED'}")
    if result.message:
        print(result.message, file=sys.stderr)
    for path in result.artifacts:
        print(f"  {path}")
    return result.exit_code
