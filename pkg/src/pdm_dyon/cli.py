"""Command-line entry point.

Exit codes: 0 success, 1 verification failure, 2 config error,
3 solver failure in a required scenario.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from pathlib import Path

from . import runner
from .config import ConfigError, load_config, parse_assignment, parse_config_text

EXIT_OK, EXIT_VERIFY, EXIT_CONFIG, EXIT_SOLVER = 0, 1, 2, 3


def _int_list(text: str) -> list[int]:
    text = text.strip()
    if not text:
        return []
    try:
        return [int(x) for x in text.split(",")]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", type=Path, help="scenario file of 'key = value' lines")
    common.add_argument("--out", type=Path, default=None,
                        help="output directory (default: $PDM_DYON_OUT or ./pdm_dyon_out)")
    common.add_argument("--seed", type=int, default=None)
    common.add_argument("--set", dest="overrides", action="append", default=[],
                        metavar="KEY=VALUE", help="override one config key (repeatable)")
    common.add_argument("-v", "--verbose", action="store_true")

    parser = argparse.ArgumentParser(prog="pdm-dyon", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("solve", parents=[common], help="solve both spin branches")
    sub.add_parser("potential", parents=[common], help="effective potential of the solution")
    p = sub.add_parser("sweep-N", parents=[common], help="solve for several radial quantum numbers")
    p.add_argument("--N-list", type=_int_list, default=[0, 1, 2, 3])
    p = sub.add_parser("compare-n", parents=[common], help="overlay several dyon charges")
    p.add_argument("--n-list", type=_int_list, default=[0, -1800])
    sub.add_parser("verify", parents=[common], help="run the residual checks")
    p = sub.add_parser("feasibility", parents=[common], help="scan n for solvability")
    p.add_argument("--n-from", type=int, default=-1800)
    p.add_argument("--n-to", type=int, default=-3600)
    p.add_argument("--n-step", type=int, default=-200)
    return parser


def _resolve_config(args):
    overrides = list(args.overrides)
    if args.seed is not None:
        overrides.append(f"seed={args.seed}")
    explicit = set()
    if args.config is not None:
        try:
            explicit |= set(parse_config_text(args.config.read_text(), str(args.config)))
        except OSError:
            pass
    explicit |= {parse_assignment(o, source="--set")[0] for o in overrides}
    if args.command == "sweep-N" and "n" not in explicit:
        overrides.insert(0, "n=-2800")
    return load_config(args.config, overrides)


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        config = _resolve_config(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG

    out = args.out or Path(os.environ.get("PDM_DYON_OUT", "pdm_dyon_out"))
    out.mkdir(parents=True, exist_ok=True)
    (out / "config.resolved").write_text(config.to_text())

    try:
        if args.command == "verify":
            ok, checks = runner.run_verify(config, out)
            for check in checks:
                print(check.line())
            return EXIT_OK if ok else EXIT_VERIFY
        if args.command == "solve":
            summary = runner.run_solve(config, out)
        elif args.command == "potential":
            summary = runner.run_potential(config, out)
        elif args.command == "sweep-N":
            summary = runner.run_spectrum_sweep(config, out, args.N_list)
        elif args.command == "compare-n":
            summary = runner.run_compare_n(config, out, args.n_list)
        else:
            if args.n_step >= 0:
                print("config error: --n-step must be negative", file=sys.stderr)
                return EXIT_CONFIG
            summary = runner.run_feasibility(config, out, args.n_from, args.n_to, args.n_step)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (ArithmeticError, ValueError) as exc:
        print(f"solver failure: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    print(json.dumps(summary, indent=2, sort_keys=True, default=runner._json_default))
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
