"""Command-line entry point.

    trainer-bridge finetune --data DIR --config FILE --base MODEL --out DIR
    trainer-bridge serve --model DIR --port P
"""

from __future__ import annotations

import argparse
import sys

from .config import ConfigError
from .data import DataError


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="trainer-bridge", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("finetune", help="fine-tune the toy model")
    p.add_argument("--data", required=True, help="dataset directory")
    p.add_argument("--config", required=True, help="fine-tuning config JSON")
    p.add_argument("--base", default="tiny-transformer", help="base model id")
    p.add_argument("--out", required=True, help="output model directory")
    p.add_argument("--seed", type=int, default=0)

    p = sub.add_parser("serve", help="serve the trained model over HTTP")
    p.add_argument("--model", required=True, help="trained model directory")
    p.add_argument("--port", type=int, default=8000)
    p.add_argument("--host", default="127.0.0.1")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "finetune":
        from .train import finetune

        try:
            manifest = finetune(args.data, args.config, args.base, args.out,
                                seed=args.seed)
        except (ConfigError, DataError) as err:
            print(f"error: {err}", file=sys.stderr)
            return 1
        print(f"model written to {manifest.output_dir} "
              f"({len(manifest.loss_trace)} training steps, "
              f"final loss {manifest.loss_trace[-1]:.3f})")
        return 0
    from .server import serve

    serve(args.model, port=args.port, host=args.host)
    return 0


if __name__ == "__main__":
    sys.exit(main())
