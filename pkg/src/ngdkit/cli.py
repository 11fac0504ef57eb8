"""Command-line interface.

Exit codes:
  0  success
  2  input error (bad arguments, unreadable or empty files)
  3  provider error (network, parse, rate limit)
  4  unknown term (a term has zero hits)
  5  coverage gap (a snapshot lacks a needed term or pair)
"""
from __future__ import annotations

import argparse
import logging
import os
import sys
from datetime import datetime, timezone
from pathlib import Path
from typing import Optional, Sequence

from ngdkit import report
from ngdkit.corpus import EmptyCorpusError, TokenizerConfig, load_corpus
from ngdkit.metric import (
    DEFAULT_NORMALIZATION,
    UNKNOWN_TERM,
    DistanceValue,
    TermQuery,
    calibrate,
    canonicalize,
    ngd,
)
from ngdkit.providers import (
    CountSnapshot,
    CoverageError,
    ProviderError,
    RemoteEndpointConfig,
    RemoteSource,
    SnapshotFormatError,
    SnapshotMiss,
    SnapshotSource,
    compare_snapshots,
    snapshot_from_pairs,
)
from ngdkit.stats import (
    StatisticsError,
    WordSet,
    etd_consistency,
    sample_word_sets,
    scan_triangle_violations,
    set_statistics,
    weighted_mean,
)

logger = logging.getLogger("ngdkit")

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_PROVIDER = 3
EXIT_UNKNOWN_TERM = 4
EXIT_COVERAGE = 5


class InputError(Exception):
    pass


def read_terms(path: str) -> list[TermQuery]:
    """One term per line; blank lines and ``#`` comments are ignored."""
    terms = []
    for line in _read_lines(path):
        try:
            terms.append(canonicalize(line))
        except ValueError as exc:
            raise InputError(f"{path}: bad term {line!r}: {exc}") from None
    return terms


def read_pairs(path: str) -> list[tuple[TermQuery, TermQuery]]:
    """One tab-separated term pair per line."""
    pairs = []
    for line in _read_lines(path):
        parts = line.split("\t")
        if len(parts) != 2:
            raise InputError(f"{path}: expected two tab-separated terms, got {line!r}")
        try:
            pairs.append((canonicalize(parts[0]), canonicalize(parts[1])))
        except ValueError as exc:
            raise InputError(f"{path}: bad pair {line!r}: {exc}") from None
    return pairs


def _read_lines(path: str) -> list[str]:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except (OSError, UnicodeDecodeError) as exc:
        raise InputError(f"cannot read {path}: {exc}") from None
    lines = []
    for raw in text.splitlines():
        line = raw.strip()
        if line and not line.startswith("#"):
            lines.append(line)
    return lines


def open_source(args):
    selected = {
        "corpus": args.corpus,
        "snapshot": args.snapshot,
        "remote": args.remote_config,
    }
    given = [name for name, value in selected.items() if value]
    kind = args.source
    if kind is None:
        if len(given) != 1:
            raise InputError(
                "select exactly one source: --corpus, --snapshot or --remote-config"
            )
        kind = given[0]
    elif selected[kind] is None:
        flag = "--remote-config" if kind == "remote" else f"--{kind}"
        raise InputError(f"--source {kind} requires {flag}")
    elif len(given) > 1:
        raise InputError("select exactly one source")
    try:
        if kind == "corpus":
            return load_corpus(args.corpus, TokenizerConfig(args.min_token_length))
        if kind == "snapshot":
            return SnapshotSource.load(args.snapshot)
        return RemoteSource(RemoteEndpointConfig.from_file(args.remote_config))
    except (OSError, ValueError) as exc:
        raise InputError(str(exc)) from None


def emit(args, text: str) -> None:
    if getattr(args, "out", None):
        Path(args.out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def _warn_anomaly(x, y, d: DistanceValue) -> None:
    if d.anomaly is not None:
        print(f"warning: {x}, {y}: {d.anomaly.value}", file=sys.stderr)


def _is_unknown(d: DistanceValue) -> bool:
    return d.is_undefined and d.reason == UNKNOWN_TERM


def cmd_index(args) -> int:
    try:
        index = load_corpus(args.corpus_path, TokenizerConfig(args.min_token_length))
    except (OSError, EmptyCorpusError) as exc:
        raise InputError(str(exc)) from None
    lines = [
        f"documents: {index.m}",
        f"vocabulary: {len(index.vocabulary())}",
        f"fingerprint: {index.fingerprint}",
        f"skipped: {len(index.skip_report)}",
    ]
    lines += [f"  {name}: {reason}" for name, reason in index.skip_report.skipped]
    emit(args, "\n".join(lines) + "\n")
    return EXIT_OK


def cmd_ngd(args) -> int:
    source = open_source(args)
    x, y = canonicalize(args.x), canonicalize(args.y)
    d = ngd(source.observe(x, y))
    _warn_anomaly(x, y, d)
    cal = calibrate(d, args.calibrate) if args.calibrate is not None else None
    if args.format == "structured":
        emit(args, report.pair_json([(x.text, y.text, d)], [cal] if cal else None))
    else:
        text = f"{d}\n"
        if cal is not None:
            text += f"calibrated: {cal}\n"
        emit(args, text)
    return EXIT_UNKNOWN_TERM if _is_unknown(d) else EXIT_OK


def cmd_matrix(args) -> int:
    words = read_terms(args.words_file)
    if len(words) < 2:
        raise InputError("matrix needs at least 2 words")
    source = open_source(args)
    rows = []
    for i, x in enumerate(words):
        for y in words[i + 1:]:
            d = ngd(source.observe(x, y))
            if args.calibrate is not None:
                d = calibrate(d, args.calibrate)
            _warn_anomaly(x, y, d)
            rows.append((x.text, y.text, d))
    if args.format == "structured":
        emit(args, report.pair_json(rows))
    else:
        emit(args, report.pair_table(rows))
    return EXIT_UNKNOWN_TERM if any(_is_unknown(d) for _, _, d in rows) else EXIT_OK


def cmd_scan(args) -> int:
    words = read_terms(args.words_file)
    if len(set(words)) < 3:
        raise InputError("scan needs at least 3 distinct words")
    source = open_source(args)
    result = scan_triangle_violations(words, source, args.tolerance or 0.0)
    emit(args, report.scan_json(result) if args.format == "structured" else report.scan_table(result))
    return EXIT_OK


def cmd_stats(args) -> int:
    source = open_source(args)
    if args.sample:
        if args.set_files:
            raise InputError("give set files or --sample, not both")
        if not hasattr(source, "vocabulary"):
            raise InputError("--sample needs a corpus source")
        try:
            sizes = [int(s) for s in args.sample.split(",")]
        except ValueError:
            raise InputError(f"bad --sample {args.sample!r}") from None
        word_sets = sample_word_sets(source, sizes, seed=args.seed, min_count=args.min_count)
    else:
        if not args.set_files:
            raise InputError("give at least one set file or --sample")
        try:
            word_sets = [WordSet(Path(p).stem, read_terms(p)) for p in args.set_files]
        except ValueError as exc:
            raise InputError(str(exc)) from None
    usable = []
    for ws in word_sets:
        try:
            usable.append(set_statistics(ws, source))
        except StatisticsError as exc:
            print(f"warning: {exc}", file=sys.stderr)
    if not usable:
        raise StatisticsError("no usable pairs in any word set")
    constant = weighted_mean((s.mean_ngd, s.n_words) for s in usable)
    tolerance = 0.1 if args.tolerance is None else args.tolerance
    consistency = None
    if all(s.mean_td is not None for s in usable):
        consistency = etd_consistency(usable, tolerance)
    fmt = report.stats_json if args.format == "structured" else report.stats_table
    emit(args, fmt(usable, consistency, constant))
    return EXIT_OK


def _created_at() -> datetime:
    epoch = os.environ.get("SOURCE_DATE_EPOCH")
    if epoch is not None:
        return datetime.fromtimestamp(int(epoch), timezone.utc)
    return datetime.now(timezone.utc).replace(microsecond=0)


def cmd_snapshot(args) -> int:
    pairs = read_pairs(args.pairs_file)
    source = open_source(args)
    snap = snapshot_from_pairs(source, pairs, created_at=_created_at())
    if args.out:
        snap.save(args.out)
        print(
            f"wrote {args.out}: {len(snap.terms)} terms, {len(snap.pairs)} pairs, m={snap.m}"
        )
    else:
        sys.stdout.write(snap.dumps())
    return EXIT_OK


def cmd_compare(args) -> int:
    try:
        a = CountSnapshot.load(args.snapshot_a)
        b = CountSnapshot.load(args.snapshot_b)
    except (OSError, SnapshotFormatError) as exc:
        raise InputError(str(exc)) from None
    pairs = read_pairs(args.pairs_file)
    result = compare_snapshots(a, b, pairs)
    fmt = report.stability_json if args.format == "structured" else report.stability_table
    emit(args, fmt(result))
    return EXIT_OK


def _source_options() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False)
    g = p.add_argument_group("count source")
    g.add_argument("--source", choices=["corpus", "snapshot", "remote"])
    g.add_argument("--corpus", metavar="PATH", help="directory of documents or line-delimited file")
    g.add_argument("--snapshot", metavar="PATH")
    g.add_argument("--remote-config", metavar="PATH")
    g.add_argument("--min-token-length", type=int, default=1, metavar="N")
    return p


def _output_options() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False)
    p.add_argument("--format", choices=["table", "structured"], default="table")
    p.add_argument("--out", metavar="PATH")
    return p


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ngdkit",
        description="Normalized Google Distance from document hit counts.",
        epilog=__doc__.split("\n", 2)[2],
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)
    src, out = _source_options(), _output_options()
    calib = argparse.ArgumentParser(add_help=False)
    calib.add_argument(
        "--calibrate", nargs="?", type=float, const=DEFAULT_NORMALIZATION, metavar="CONST",
        help=f"also divide by CONST (default {DEFAULT_NORMALIZATION})",
    )
    tol = argparse.ArgumentParser(add_help=False)
    tol.add_argument("--tolerance", type=float, metavar="X")

    p = sub.add_parser("index", parents=[out], help="index a corpus and summarize it")
    p.add_argument("corpus_path")
    p.add_argument("--min-token-length", type=int, default=1, metavar="N")
    p.set_defaults(func=cmd_index)

    p = sub.add_parser("ngd", parents=[src, out, calib], help="distance between two terms")
    p.add_argument("x")
    p.add_argument("y")
    p.set_defaults(func=cmd_ngd)

    p = sub.add_parser("matrix", parents=[src, out, calib], help="all pairwise distances")
    p.add_argument("words_file")
    p.set_defaults(func=cmd_matrix)

    p = sub.add_parser("scan", parents=[src, out, tol], help="find triangle-inequality violations")
    p.add_argument("words_file")
    p.set_defaults(func=cmd_scan)

    p = sub.add_parser("stats", parents=[src, out, tol], help="expected NGD over word sets")
    p.add_argument("set_files", nargs="*")
    p.add_argument("--sample", metavar="SIZES", help="comma-separated sizes of random word sets")
    p.add_argument("--seed", type=int)
    p.add_argument("--min-count", type=int, default=5, metavar="N")
    p.set_defaults(func=cmd_stats)

    p = sub.add_parser("snapshot", parents=[src], help="freeze counts for a list of pairs")
    p.add_argument("pairs_file")
    p.add_argument("--out", metavar="PATH")
    p.set_defaults(func=cmd_snapshot)

    p = sub.add_parser("compare", parents=[out], help="NGD stability between two snapshots")
    p.add_argument("snapshot_a")
    p.add_argument("snapshot_b")
    p.add_argument("pairs_file")
    p.set_defaults(func=cmd_compare)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s: %(message)s",
    )
    try:
        return args.func(args)
    except (InputError, StatisticsError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (SnapshotMiss, CoverageError) as exc:
        pair = getattr(exc, "pair", None)
        suffix = f" (pair: {', '.join(pair)})" if pair else ""
        print(f"error: {exc}{suffix}", file=sys.stderr)
        return EXIT_COVERAGE
    except ProviderError as exc:
        pair = getattr(exc, "pair", None)
        suffix = f" (pair: {', '.join(pair)})" if pair else ""
        print(f"error: {exc} [query {exc.query}]{suffix}", file=sys.stderr)
        return EXIT_PROVIDER


if __name__ == "__main__":
    sys.exit(main())
