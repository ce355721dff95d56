"""Command-line entry point.

    ils-lab run --config FILE [--seed-state K --seed-tangent K --seed-noise K] [--out DIR]
    ils-lab sweep --config FILE --seeds A..B [--jobs J] [--out DIR]
    ils-lab find-regime --config FILE [--seeds A..B] [--out DIR]
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .config import ConfigError, parse_config, with_seeds
from .runner import find_regime, replace_output, run_scenario, sweep


def _seed_range(text):
    try:
        a, b = text.split("..")
        lo, hi = int(a), int(b)
    except ValueError:
        raise argparse.ArgumentTypeError("expected a range like 1..10")
    if hi < lo:
        raise argparse.ArgumentTypeError("range end must be >= start")
    return range(lo, hi + 1)


def build_parser():
    parser = argparse.ArgumentParser(
        prog="ils-lab",
        description="Sensitivity experiments on rings of nonlocally coupled "
                    "Roessler oscillators")
    sub = parser.add_subparsers(dest="command", required=True)

    run_p = sub.add_parser("run", help="execute one scenario run")
    run_p.add_argument("--config", required=True, help="run-config file")
    run_p.add_argument("--seed-state", type=int, default=None)
    run_p.add_argument("--seed-tangent", type=int, default=None)
    run_p.add_argument("--seed-noise", type=int, default=None)
    run_p.add_argument("--out", default=None, help="output directory override")

    sweep_p = sub.add_parser("sweep", help="independent runs over a seed range")
    sweep_p.add_argument("--config", required=True)
    sweep_p.add_argument("--seeds", required=True, type=_seed_range,
                         help="inclusive range A..B")
    sweep_p.add_argument("--jobs", type=int, default=1)
    sweep_p.add_argument("--out", default=None)

    find_p = sub.add_parser("find-regime",
                            help="scan state seeds for the scenario's regime")
    find_p.add_argument("--config", required=True)
    find_p.add_argument("--seeds", type=_seed_range, default=range(1, 21))
    find_p.add_argument("--out", default=None)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = parse_config(args.config)
    except ConfigError as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    if args.out is not None:
        cfg = replace_output(cfg, Path(args.out))

    if args.command == "run":
        cfg = with_seeds(cfg, args.seed_state, args.seed_tangent, args.seed_noise)
        manifest = run_scenario(cfg)
        print(f"{manifest.status}: {cfg.scenario} -> {cfg.output_dir} "
              f"({manifest.runtime_seconds:.1f}s)")
        if manifest.status != "completed":
            print(f"error: {manifest.error}", file=sys.stderr)
            return 1
        return 0

    if args.command == "sweep":
        manifests = sweep(cfg, args.seeds, jobs=args.jobs)
        bad = [m for m in manifests if m.status != "completed"]
        for m in manifests:
            print(f"{m.status}: seed run -> {m.config['output_dir']}")
        return 1 if bad else 0

    rows = find_regime(cfg, args.seeds)
    for r in rows:
        mark = "*" if r["qualifies"] else " "
        print(f"{mark} seed {r['seed']:4d}  lam_tail={r['lam_tail']:+.5f}  "
              f"two_cluster={r['two_cluster']}  coexistence={r['coexistence']}")
    hits = [r["seed"] for r in rows if r["qualifies"]]
    print(f"qualifying seeds: {hits if hits else 'none'}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
