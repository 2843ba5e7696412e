"""Command line entry point.

Exit codes: 0 success, 1 some items failed, 2 invalid invocation.
"""

from __future__ import annotations

import argparse
import logging
import sys

from .config import ConfigError, load_config
from .pipeline import STAGES, Pipeline, StageError

EXIT_OK, EXIT_PARTIAL, EXIT_USAGE = 0, 1, 2


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="biorecords",
        description="Scanned registers -> OCR text -> person JSON -> linked database records.",
    )
    parser.add_argument("command", choices=[*STAGES, "all"], help="pipeline stage to run")
    parser.add_argument("--config", required=True, help="pipeline config (JSON)")
    parser.add_argument("--volume", action="append", dest="volumes", metavar="ID",
                        help="restrict to this volume (repeatable)")
    parser.add_argument("--force", action="store_true", help="redo outputs that already exist")
    parser.add_argument("--ground-truth", help="labeled directory for evaluate")
    parser.add_argument("--jobs", type=int, help="parallel workers for page/person stages")
    parser.add_argument("--log-level", help="override the config's logging level")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.jobs is not None and args.jobs < 1:
        print("biorecords: --jobs must be at least 1", file=sys.stderr)
        return EXIT_USAGE
    try:
        cfg = load_config(args.config)
    except ConfigError as exc:
        print(f"biorecords: {exc}", file=sys.stderr)
        return EXIT_USAGE
    logging.basicConfig(
        level=(args.log_level or cfg.log_level).upper(),
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
    )
    try:
        pipeline = Pipeline(cfg, force=args.force, jobs=args.jobs, volumes=args.volumes)
    except ValueError as exc:
        print(f"biorecords: {exc}", file=sys.stderr)
        return EXIT_USAGE
    try:
        pipeline.run(args.command, ground_truth=args.ground_truth)
    except StageError as exc:
        print(f"biorecords: {exc}", file=sys.stderr)
        return EXIT_USAGE
    finally:
        pipeline.write_summary()
    if pipeline.failed:
        for stage, res in pipeline.results.items():
            for f in res.failures:
                print(f"FAILED {stage} {f['item']}: {f['error']}", file=sys.stderr)
        return EXIT_PARTIAL
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
