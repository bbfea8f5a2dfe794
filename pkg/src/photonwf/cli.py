"""Command line entry point: ``photonwf run <config>`` and ``photonwf list``.

Exit codes: 0 success, 1 output could not be written, 2 unreadable or
malformed config (or bad arguments), 3 invalid config values, 4 a numerical
guard tripped (truncated spectrum, undersampled window, failed ``--check``).
"""
from __future__ import annotations

import argparse
import configparser
import sys

from .errors import ConfigError, NumericalGuardError
from .scenarios import SCENARIOS, csv_text, load_config, run_scenario

EXIT_OK = 0
EXIT_IO = 1
EXIT_PARSE = 2
EXIT_CONFIG = 3
EXIT_NUMERIC = 4


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="photonwf", description="Two-photon interference scans.")
    sub = parser.add_subparsers(dest="command", required=True)
    run = sub.add_parser("run", help="run the scan described by an INI config file")
    run.add_argument("config", help="path to the scenario config")
    run.add_argument("--out", help="CSV destination (default: stdout)")
    run.add_argument("--threads", type=int, default=1, help="scan points evaluated concurrently")
    run.add_argument("--check", action="store_true",
                     help="verify rate >= 0 and rate = direct + exchange before writing")
    sub.add_parser("list", help="list scenario names")
    return parser


def _error(msg: str) -> None:
    print(f"photonwf: error: {msg}", file=sys.stderr)


def run_scan(path, out=None, threads: int = 1, check: bool = False) -> int:
    """Load, run and write one scan; returns the process exit status."""
    try:
        cfg = load_config(path)
    except (OSError, UnicodeDecodeError) as exc:
        _error(f"cannot read config {path}: {exc}")
        return EXIT_PARSE
    except configparser.Error as exc:
        _error(f"malformed config {path}: {exc}")
        return EXIT_PARSE
    except ConfigError as exc:
        _error(f"invalid config: {exc}")
        return EXIT_CONFIG
    try:
        result = run_scenario(cfg, threads=threads)
        if check:
            problems = result.check_invariants()
            if problems:
                _error("invariant check failed: " + "; ".join(problems))
                return EXIT_NUMERIC
        text = csv_text(result)
    except NumericalGuardError as exc:
        _error(str(exc))
        return EXIT_NUMERIC
    except ConfigError as exc:
        _error(f"invalid config: {exc}")
        return EXIT_CONFIG
    try:
        if out is None:
            sys.stdout.write(text)
        else:
            with open(out, "w", encoding="utf-8", newline="\n") as fh:
                fh.write(text)
    except OSError as exc:
        _error(f"cannot write {out}: {exc}")
        return EXIT_IO
    return EXIT_OK


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "list":
        for name, spec in SCENARIOS.items():
            print(f"{name}\t{spec.summary}")
        return EXIT_OK
    if args.threads < 1:
        _error("--threads must be >= 1")
        return EXIT_PARSE
    return run_scan(args.config, args.out, args.threads, args.check)


if __name__ == "__main__":
    sys.exit(main())
