"""
Entry point: work-statistics experiments from JSON configs.

Usage:
    python main.py spin-quench [config.json] --out results/spin
    python main.py work-pdf config.json --out results
    python main.py average-sweep config.json
    python main.py verify config.json [--perturb 1e-3]
    python main.py oracle-compare config.json

Exit status: 0 on success, 1 when a check fails, 2 on an invalid config.
"""

import argparse
import logging
import sys
from pathlib import Path

from config.settings import LOG_LEVEL, OUTPUT_DIR

logging.basicConfig(
    level=LOG_LEVEL,
    format="%(asctime)s [%(levelname)s] %(name)s: %(message)s",
    stream=sys.stdout,
)
logger = logging.getLogger(__name__)

COMMANDS = ("spin-quench", "work-pdf", "average-sweep", "verify", "oracle-compare")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(description="Quantum work measurement experiments")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        cmd = sub.add_parser(name)
        cmd.add_argument("config", nargs="?" if name == "spin-quench" else None,
                         help="experiment config (JSON)")
        cmd.add_argument("--out", default=OUTPUT_DIR, help="output directory")
        cmd.add_argument("--seed", type=int, default=None, help="reserved; the pipeline is deterministic")
        if name == "verify":
            cmd.add_argument("--perturb", type=float, default=0.0,
                             help="relative change of the first forward weight (negative control)")
    return parser


def run(args: argparse.Namespace) -> int:
    from experiments.commands import cmd_average_sweep, cmd_oracle_compare, cmd_work_pdf, output_dir
    from experiments.config import load_config
    from experiments.io import write_metadata
    from experiments.spin_quench import W_RANGE, cmd_spin_quench
    from experiments.verify import cmd_verify
    from quantum.errors import ConfigError

    if args.seed is not None:
        logger.info(f"--seed {args.seed} ignored: no step of the pipeline is random")
    out = Path(args.out)
    cfg = load_config(args.config) if args.config else None
    passed = True

    if args.command == "spin-quench":
        if cfg is not None and cfg.two_level is None:
            raise ConfigError("system.two_level", "required by spin-quench")
        w = cfg.output.grid(W_RANGE) if cfg and cfg.output.w_min is not None else None
        fmt = cfg.output.format if cfg else "csv"
        target = output_dir(cfg, out) if cfg else out
        cmd_spin_quench(cfg.two_level if cfg else None, target, fmt, w=w, sigma_e2s=cfg.sweep if cfg else None)
    elif args.command == "work-pdf":
        cmd_work_pdf(cfg, out)
    elif args.command == "average-sweep":
        cmd_average_sweep(cfg, out)
    elif args.command == "oracle-compare":
        _, passed = cmd_oracle_compare(cfg, out)
    elif args.command == "verify":
        _, passed = cmd_verify(cfg, out, args.perturb)

    write_metadata(out, args.command, args.config, args.seed, passed=passed,
                   perturbation=getattr(args, "perturb", 0.0))
    return 0 if passed else 1


def main(argv=None) -> int:
    from quantum.errors import ValidationError

    args = build_parser().parse_args(argv)
    try:
        return run(args)
    except ValidationError as e:
        # ConfigError is a ValidationError
        print(f"error: {e}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
