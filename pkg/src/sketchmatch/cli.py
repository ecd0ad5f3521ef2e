"""Command line interface: ``sketchmatch train|query|evaluate``.

Exit codes: 0 success, 1 usage error, 2 data error, 3 numeric failure.
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from .errors import ConfigError, DataError, NumericError
from .pipeline import (
    Classifier,
    PipelineConfig,
    cmd_evaluate,
    cmd_query,
    cmd_train,
    parse_config_text,
)

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_NUMERIC = 0, 1, 2, 3

# CLI flag -> PipelineConfig field
FLAG_FIELDS = {
    "resize_w": "resize_w",
    "resize_h": "resize_h",
    "levels": "wavelet_levels",
    "classifier": "classifier",
    "top_n": "top_n",
    "centering": "centering_mode",
    "svm_c": "svm_c",
}


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _add_config_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", type=Path, help="file of 'key = value' lines")
    p.add_argument("--resize-w", type=int)
    p.add_argument("--resize-h", type=int)
    p.add_argument("--levels", type=int, help="Haar decomposition depth")
    p.add_argument("--classifier", choices=[c.value for c in Classifier])
    p.add_argument("--top-n", type=int)
    p.add_argument("--centering", choices=["per_image_scalar", "global_mean_vector"])
    p.add_argument("--svm-c", type=float)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="sketchmatch", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("train", help="build a model from <root>/photos and <root>/sketches")
    p.add_argument("dataset", type=Path)
    p.add_argument("model", type=Path)
    _add_config_flags(p)

    p = sub.add_parser("query", help="rank gallery identities for one sketch")
    p.add_argument("model", type=Path)
    p.add_argument("sketch", type=Path)
    p.add_argument("--top-n", type=int)
    p.add_argument("--classifier", choices=[c.value for c in Classifier])

    p = sub.add_parser("evaluate", help="write RMSE and cumulative match reports")
    p.add_argument("model", type=Path)
    p.add_argument("dataset", type=Path)
    p.add_argument("--report", type=Path, default=Path("report.txt"))
    return parser


def config_from_args(args: argparse.Namespace) -> PipelineConfig:
    values = {}
    if args.config is not None:
        try:
            values = parse_config_text(args.config.read_text())
        except OSError as exc:
            raise ConfigError(f"cannot read config {args.config}: {exc.strerror or exc}") from None
    for flag, name in FLAG_FIELDS.items():
        value = getattr(args, flag, None)
        if value is not None:
            values[name] = value
    return PipelineConfig.from_dict(values)


def run(argv=None, out=None) -> int:
    out = out or sys.stdout
    try:
        args = build_parser().parse_args(argv)
    except UsageError as exc:
        print(f"sketchmatch: usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s: %(message)s")
    try:
        if args.command == "train":
            model = cmd_train(config_from_args(args), args.dataset, args.model)
            eig = model.eigen
            print(f"trained on {len(eig.gallery_labels)} photos: D={eig.dim} K={eig.n_components} "
                  f"I={model.offset.value}", file=out)
            for w in model.warnings:
                print(f"warning: {w}", file=out)
        elif args.command == "query":
            if args.top_n is not None and args.top_n < 1:
                raise ConfigError("--top-n must be >= 1")
            matches = cmd_query(args.model, args.sketch, args.top_n, args.classifier)
            for rank, (label, score) in enumerate(matches.entries, 1):
                print(f"{rank}\t{label}\t{score:.6g}", file=out)
        elif args.command == "evaluate":
            result = cmd_evaluate(args.model, args.dataset, args.report)
            out.write(result.report_text())
    except ConfigError as exc:
        print(f"sketchmatch: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except DataError as exc:
        print(f"sketchmatch: {exc}", file=sys.stderr)
        return EXIT_DATA
    except NumericError as exc:
        print(f"sketchmatch: numeric failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    return EXIT_OK


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
