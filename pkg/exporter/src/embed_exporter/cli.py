"""Command-line front end: one corpus directory in, one embedding TSV out."""

import argparse
import sys

from .encoders import EncoderError
from .export import DEFAULT_BATCH, ExportError, export


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="embed-exporter",
        description="Export unique corpus texts as an embedding TSV",
    )
    parser.add_argument("--corpus", required=True, help="corpus directory to read")
    parser.add_argument("--out", required=True, help="output TSV path")
    parser.add_argument(
        "--encoder",
        default="hash-64",
        help="hash-D for the builtin encoder, or a local sentence model name",
    )
    parser.add_argument(
        "--batch-size", type=int, default=DEFAULT_BATCH, help="texts encoded per batch"
    )
    return parser


def main(argv: list[str] | None = None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        count = export(args.corpus, args.out, args.encoder, args.batch_size)
    except (EncoderError, ExportError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    print(f"wrote {count} texts to {args.out}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
