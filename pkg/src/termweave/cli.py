"""Command-line entry point.

    termweave <stage> --config run.toml [--seed N] [--work-dir D] [--offline]
    termweave pipeline run --config run.toml
    termweave fixture --out DIR [--seed N]

Exit codes: 0 success, 1 usage/config error, 2 stage failure,
3 backend exhaustion.
"""

from __future__ import annotations

import argparse
import logging
import sys

from .backends import BackendError
from .pipeline import (
    EXIT_BACKEND,
    EXIT_OK,
    EXIT_STAGE,
    EXIT_USAGE,
    STAGES,
    ConfigError,
    PipelineRunner,
    StageError,
    load_config,
)


def _add_common(p: argparse.ArgumentParser):
    p.add_argument("--config", required=True, help="TOML run configuration")
    p.add_argument("--seed", type=int, help="override the run seed")
    p.add_argument("--work-dir", help="override the work directory")
    p.add_argument("--offline", action="store_true",
                   help="forbid network; requires mocks or a warm cache")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="termweave",
                                     description=__doc__,
                                     formatter_class=argparse.RawDescriptionHelpFormatter)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    for stage in STAGES:
        p = sub.add_parser(stage, help=f"run the {stage} stage")
        _add_common(p)

    p = sub.add_parser("pipeline", help="run the whole pipeline")
    p.add_argument("action", choices=["run"])
    _add_common(p)

    p = sub.add_parser("fixture", help="write the bundled offline demo fixture")
    p.add_argument("--out", required=True)
    p.add_argument("--seed", type=int, default=7)
    p.add_argument("--terms", type=int, default=50)
    p.add_argument("--segments", type=int, default=200)
    return parser


def _overrides(args) -> dict:
    out = {}
    if args.seed is not None:
        out["seed"] = args.seed
    if args.work_dir:
        out["work_dir"] = args.work_dir
    if args.offline:
        out["offline"] = True
    return out


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.INFO,
                        format="%(levelname)s %(name)s: %(message)s")

    if args.command == "fixture":
        from .fixtures import make_fixture

        make_fixture(args.out, seed=args.seed, n_terms=args.terms,
                     n_segments=args.segments)
        print(f"fixture written to {args.out}")
        return EXIT_OK

    try:
        cfg = load_config(args.config, overrides=_overrides(args))
        runner = PipelineRunner(cfg)
        if args.command == "pipeline":
            runner.run_all()
        else:
            runner.run_stage(args.command)
    except ConfigError as err:
        print(f"config error: {err}", file=sys.stderr)
        return EXIT_USAGE
    except BackendError as err:
        print(f"backend exhausted: {err}", file=sys.stderr)
        return EXIT_BACKEND
    except StageError as err:
        print(f"stage failed: {err}", file=sys.stderr)
        return EXIT_STAGE
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
