"""Command line entry point: ``photonbell {analytic,simulate,chsh,sweep}``."""

from __future__ import annotations

import argparse
import sys

from . import counts
from .harness import RUNNERS, ConfigError, RunConfig, write_record
from .model import ModelError, ModelKind


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", metavar="PATH", help="JSON run configuration")
    common.add_argument("--out", metavar="PATH", help="output file (default: stdout or $PHOTONBELL_OUT_DIR)")
    common.add_argument("--format", choices=("csv", "json"))
    common.add_argument("--seed", type=int, metavar="U64")
    common.add_argument("--n", type=int, metavar="U64", help="Monte Carlo trials")
    common.add_argument("--chunk", type=int, help="trials per deterministic chunk")
    common.add_argument("--workers", type=int)
    common.add_argument("--model", choices=[m.value for m in ModelKind])
    common.add_argument("--grid", type=int, help="phase grid points per CHSH axis")
    common.add_argument("--convention", choices=(counts.RATIO, counts.PUBLISHED))
    for name in ("alpha", "beta", "C", "theta-i", "theta-j", "omega"):
        common.add_argument(f"--{name}", type=float, dest=name.replace("-", "_"))

    parser = argparse.ArgumentParser(prog="photonbell", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("analytic", parents=[common], help="hidden-phase moments and correlation")
    sub.add_parser("simulate", parents=[common], help="Monte Carlo +/-1 counts")
    chsh = sub.add_parser("chsh", parents=[common], help="CHSH statistic")
    chsh.add_argument("--source", choices=("analytic", "empirical"))
    chsh.add_argument("--search", action="store_true", default=None, help="grid-search the setting")
    chsh.add_argument("--setting", type=float, nargs=4, metavar=("A", "A_PRIME", "B", "B_PRIME"))
    sweep = sub.add_parser("sweep", parents=[common], help="correlation versus theta_i - theta_j")
    sweep.add_argument("--start", type=float)
    sweep.add_argument("--stop", type=float)
    sweep.add_argument("--step", type=float)
    return parser


def resolve_config(args: argparse.Namespace) -> RunConfig:
    """Config file (or defaults) with command-line flags layered on top."""
    config = RunConfig.load(args.config) if args.config else RunConfig()
    d = config.to_dict()
    for key in ("alpha", "beta", "C", "theta_i", "theta_j", "omega"):
        if getattr(args, key) is not None:
            d["experiment"][key] = getattr(args, key)
    for key in ("seed", "n", "chunk"):
        if getattr(args, key) is not None:
            d["sampler"][key] = getattr(args, key)
    simple = {"workers": "workers", "model": "detector_model", "grid": "grid", "convention": "convention",
              "source": "source", "search": "search"}
    for arg, key in simple.items():
        if getattr(args, arg, None) is not None:
            d[key] = getattr(args, arg)
    if getattr(args, "setting", None):
        d["setting"] = dict(zip(("a", "a_prime", "b", "b_prime"), args.setting))
    for key in ("start", "stop", "step"):
        if getattr(args, key, None) is not None:
            d["sweep"][key] = getattr(args, key)
    if args.format:
        d["output"]["format"] = args.format
    if args.out:
        d["output"]["path"] = args.out
    return RunConfig.from_dict(d)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        config = resolve_config(args)
        record = RUNNERS[args.command](config)
        text = write_record(record, config.output.format, config.output.path)
    except (ConfigError, ModelError, OSError) as err:
        print(f"photonbell: error: {err}", file=sys.stderr)
        return 2
    if text is not None:
        sys.stdout.write(text if text.endswith("\n") else text + "\n")
    return 0


if __name__ == "__main__":
    sys.exit(main())
