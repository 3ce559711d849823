"""Command-line entry point.

Subcommands: ingest-check, train, grid-mono, grid-bi, probe,
heldout-uralic, render, all.  Every flag mirrors a config-file key and
overrides it.  Exit codes: 0 success, 1 config error, 2 data error,
3 runtime failure.
"""
from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .config import ConfigError, build_config, parse_config_file
from .data import FormatError
from .figures import FIGURE_KINDS, FigureSpec, render_figure
from .pipeline import EXIT_CONFIG, EXIT_DATA, EXIT_OK, EXIT_RUNTIME, ingest_summary, run_pipeline

__all__ = ["main", "console_main"]

COMMAND_STAGES = {
    "train": ("ingest", "train"),
    "grid-mono": ("ingest", "grid-mono"),
    "grid-bi": ("ingest", "grid-bi"),
    "probe": ("probe",),
    "heldout-uralic": ("heldout",),
    "all": ("ingest", "train", "grid-mono", "grid-bi", "probe", "heldout", "render"),
}


def _comma_list(value: str) -> list[str]:
    return [v.strip() for v in value.split(",") if v.strip()]


def _comma_ints(value: str) -> list[int]:
    return [int(v) for v in value.split(",") if v.strip()]


def _add_config_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", type=Path, help="flat key=value config file")
    parser.add_argument("--data-dir", dest="data_dir", type=Path)
    parser.add_argument("--embeddings", type=Path)
    parser.add_argument("--wals", type=Path)
    parser.add_argument("--output-dir", dest="output_dir", type=Path)
    parser.add_argument("--snapshots-dir", dest="snapshots_dir", type=Path)
    parser.add_argument("--languages", type=_comma_list)
    parser.add_argument("--grid-languages", dest="grid_languages", type=_comma_list)
    parser.add_argument("--test-languages", dest="test_languages", type=_comma_list)
    parser.add_argument("--baseline-language", dest="baseline_language")
    parser.add_argument("--bi-targets", dest="bi_targets", type=_comma_list)
    parser.add_argument("--bi-helpers", dest="bi_helpers", type=_comma_list)
    parser.add_argument("--heldout-languages", dest="heldout_languages", type=_comma_list)
    parser.add_argument("--probe-features", dest="probe_features", type=_comma_list)
    parser.add_argument("--seed-list", dest="seed_list", type=_comma_ints)
    parser.add_argument("--downsample", type=int)
    parser.add_argument("--delta", type=float)
    parser.add_argument("--lambda", dest="l2_lambda", type=float)
    parser.add_argument("--permutations", type=int)
    parser.add_argument("--workers", type=int)
    parser.add_argument("--epochs", type=int)
    parser.add_argument("--patience", type=int)
    parser.add_argument("--lr", type=float)
    parser.add_argument("--char-emb-dim", dest="char_emb_dim", type=int)
    parser.add_argument("--char-lstm-hidden", dest="char_lstm_hidden", type=int)
    parser.add_argument("--word-lstm-hidden", dest="word_lstm_hidden", type=int)
    parser.add_argument("--word-lstm-layers", dest="word_lstm_layers", type=int)
    parser.add_argument("--lang-emb-dim", dest="lang_emb_dim", type=int)
    parser.add_argument(
        "--no-lang-emb",
        dest="use_lang_emb",
        action="store_const",
        const=False,
        default=None,
        help="drop the language-embedding concatenation",
    )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="langprobe",
        description="Multilingual tagging, transfer grids, and typology probing",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for command in ("ingest-check", "train", "grid-mono", "grid-bi", "probe", "heldout-uralic", "all"):
        p = sub.add_parser(command)
        _add_config_flags(p)
    render = sub.add_parser("render", help="render one CSV into an SVG figure")
    render.add_argument("--kind", choices=FIGURE_KINDS, required=True)
    render.add_argument("--source", type=Path, required=True)
    render.add_argument("--output", type=Path, required=True)
    return parser


_CONFIG_KEYS = (
    "data_dir",
    "embeddings",
    "wals",
    "output_dir",
    "snapshots_dir",
    "languages",
    "grid_languages",
    "test_languages",
    "baseline_language",
    "bi_targets",
    "bi_helpers",
    "heldout_languages",
    "probe_features",
    "seed_list",
    "downsample",
    "delta",
    "l2_lambda",
    "permutations",
    "workers",
    "epochs",
    "patience",
    "lr",
    "char_emb_dim",
    "char_lstm_hidden",
    "word_lstm_hidden",
    "word_lstm_layers",
    "lang_emb_dim",
    "use_lang_emb",
)


def _config_from_args(args: argparse.Namespace):
    file_values = parse_config_file(args.config) if args.config else {}
    overrides = {key: getattr(args, key, None) for key in _CONFIG_KEYS}
    return build_config(file_values, overrides)


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "render":
            render_figure(FigureSpec(kind=args.kind, source=args.source, output=args.output))
            return EXIT_OK
        cfg = _config_from_args(args)
        if args.command == "ingest-check":
            for line in ingest_summary(cfg):
                print(line)
            return EXIT_OK
        result = run_pipeline(cfg, COMMAND_STAGES[args.command])
        for entry in result.manifest:
            print(f"[{entry['stage']}] {entry['item']}: {entry['reason']}", file=sys.stderr)
        if result.run_dir is not None:
            print(f"run directory: {result.run_dir}")
        return result.exit_code
    except ConfigError as err:
        print(f"config error: {err}", file=sys.stderr)
        return EXIT_CONFIG
    except (FormatError, FileNotFoundError) as err:
        print(f"data error: {err}", file=sys.stderr)
        return EXIT_DATA
    except ValueError as err:
        print(f"data error: {err}", file=sys.stderr)
        return EXIT_DATA
    except Exception as err:
        print(f"runtime failure: {type(err).__name__}: {err}", file=sys.stderr)
        return EXIT_RUNTIME


def console_main() -> None:
    sys.exit(main())
