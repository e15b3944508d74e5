"""Command-line front end.

    vlcontrast analyze --config analysis.json [overrides]
    vlcontrast synth   --spec corpus.json --outdir DIR
    vlcontrast compare --config analysis.json [overrides]

Exit codes: 0 success, 1 corpus-level runtime failure, 2 configuration
or usage error.  Per-vowel failures never abort a run; they surface as
flagged rows in the feature table.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import logging
import sys
from pathlib import Path

from . import __version__
from .alignment import PhoneMapError
from .report import (
    AnalysisConfig,
    ConfigError,
    CorpusLoadError,
    run_analysis,
    write_atomic,
)
from .synthgen import CorpusSpec, generate_corpus

EXIT_OK = 0
EXIT_RUNTIME = 1
EXIT_CONFIG = 2


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="vlcontrast",
        description="Vowel-length contrast analysis over forced-alignment files.",
    )
    parser.add_argument("--version", action="version",
                        version=f"vlcontrast {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true",
                        help="log progress to stderr")
    sub = parser.add_subparsers(dest="command", required=True)

    def add_overrides(p):
        p.add_argument("--bin-width", type=float, default=None, metavar="MS",
                       help="histogram bin width in ms (default from config, 10)")
        p.add_argument("--no-outlier-filter", action="store_true",
                       help="disable the 3-sigma outlier rule")
        p.add_argument("--speaker-from", default=None, metavar="RULE",
                       help="speaker id rule: fixed:<id> or prefix:<delim>")
        p.add_argument("--outdir", default=None, metavar="DIR",
                       help="override the configured output directory")

    p_analyze = sub.add_parser("analyze", help="run the full contrast analysis")
    p_analyze.add_argument("--config", required=True, metavar="PATH",
                           help="analysis config JSON")
    add_overrides(p_analyze)

    p_compare = sub.add_parser("compare",
                               help="run only the configured corpus comparisons")
    p_compare.add_argument("--config", required=True, metavar="PATH")
    add_overrides(p_compare)

    p_synth = sub.add_parser("synth", help="generate a synthetic corpus")
    p_synth.add_argument("--spec", required=True, metavar="PATH",
                         help="corpus spec JSON")
    p_synth.add_argument("--outdir", default=".", metavar="DIR",
                         help="directory to write the corpus under")
    return parser


def _load_config(args) -> AnalysisConfig:
    path = Path(args.config)
    if not path.is_file():
        raise ConfigError(f"config file not found: {path}")
    config = AnalysisConfig.from_json(path.read_text(encoding="utf-8"))
    updates = {}
    if args.bin_width is not None:
        updates["bin_width_ms"] = args.bin_width
    if args.no_outlier_filter:
        updates["outlier_filtering"] = False
    if args.speaker_from is not None:
        updates["speaker_from"] = args.speaker_from
    if args.outdir is not None:
        updates["output_dir"] = args.outdir
    if updates:
        config = dataclasses.replace(config, **updates)
    return config


def _cmd_analyze(args) -> int:
    config = _load_config(args)
    result = run_analysis(config)
    for path in result.output_paths:
        print(f"wrote {path}")
    return EXIT_OK


def _cmd_compare(args) -> int:
    config = _load_config(args)
    if not config.comparisons:
        raise ConfigError("config lists no comparisons")
    result = run_analysis(config, comparisons_only=True)
    for path in result.output_paths:
        print(f"wrote {path}")
    return EXIT_OK


def _cmd_synth(args) -> int:
    spec_path = Path(args.spec)
    if not spec_path.is_file():
        raise ConfigError(f"spec file not found: {spec_path}")
    try:
        spec = CorpusSpec.from_json(spec_path.read_text(encoding="utf-8"))
    except (json.JSONDecodeError, KeyError, ValueError, TypeError) as exc:
        raise ConfigError(f"invalid corpus spec {spec_path}: {exc}") from exc
    corpus = generate_corpus(spec)
    out_dir = Path(args.outdir) / spec.corpus_id
    for name, text in sorted(corpus.files.items()):
        write_atomic(out_dir / name, text)
    truth_lines = ["vowel,length,duration_ms,utterance_id"]
    truth_lines += [
        f"{t.vowel_class},{t.length_class},{t.duration_ms!r},{t.utterance_id}"
        for t in corpus.tokens
    ]
    write_atomic(out_dir / "tokens_truth.csv", "\n".join(truth_lines) + "\n")
    print(f"wrote {len(corpus.files) + 1} files under {out_dir} "
          f"({len(corpus.tokens)} vowel tokens)")
    return EXIT_OK


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        stream=sys.stderr, format="%(levelname)s %(name)s: %(message)s")
    try:
        if args.command == "analyze":
            return _cmd_analyze(args)
        if args.command == "compare":
            return _cmd_compare(args)
        if args.command == "synth":
            return _cmd_synth(args)
        parser.error(f"unknown command {args.command!r}")
    except (ConfigError, PhoneMapError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except CorpusLoadError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
