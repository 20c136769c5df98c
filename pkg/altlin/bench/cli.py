"""
Command-line entry point

    python -m altlin.bench.cli run <config> [--out-dir DIR]
    python -m altlin.bench.cli validate <config>
    python -m altlin.bench.cli gen-instance <config> <out_dir>

Exit codes: 0 success, 1 configuration error, 2 solver divergence,
3 complexity bound violated, 4 solver failure.
"""

import argparse
import logging
import sys
from pathlib import Path
from typing import List, Optional

from altlin.bench.config import load_experiment, validate_config
from altlin.bench.runner import EXIT_CONFIG_ERROR, EXIT_OK, generate_instance, run_experiment
from altlin.errors import ConfigError


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="altlin-bench", description="Run alternating linearization benchmarks")
    parser.add_argument("--verbose", "-v", action="store_true", help="log solver progress")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run an experiment config")
    run.add_argument("config", help="experiment INI file")
    run.add_argument("--out-dir", help="override the output directory")

    validate = sub.add_parser("validate", help="check an experiment config without running it")
    validate.add_argument("config", help="experiment INI file")

    gen = sub.add_parser("gen-instance", help="write the instance of a config's [problem] section")
    gen.add_argument("spec", help="experiment INI file")
    gen.add_argument("out", help="directory for the matrix files")
    return parser


def _print_config_error(exc: ConfigError):
    print(f"✗ Invalid configuration{' ' + exc.path if exc.path else ''}:")
    for location, message in exc.problems:
        print(f"  {location}: {message}")


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.WARNING,
        format="%(asctime)s %(name)s %(levelname)s %(message)s",
    )

    if args.command == "validate":
        problems = validate_config(args.config)
        if problems:
            print(f"✗ {args.config}: {len(problems)} problem(s)")
            for problem in problems:
                print(f"  {problem}")
            return EXIT_CONFIG_ERROR
        print(f"✓ {args.config} is valid")
        return EXIT_OK

    try:
        if args.command == "run":
            config = load_experiment(args.config, out_dir=args.out_dir)
        else:
            config = load_experiment(args.spec, require_solvers=False)
    except ConfigError as exc:
        _print_config_error(exc)
        return EXIT_CONFIG_ERROR

    if args.command == "run":
        return run_experiment(config)

    try:
        written = generate_instance(config.problem, Path(args.out))
    except (ValueError, OSError) as exc:
        print(f"✗ Could not generate instance: {exc}")
        return EXIT_CONFIG_ERROR
    for path in written:
        print(f"✓ Wrote {path}")
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
