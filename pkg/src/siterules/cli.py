"""Command-line front end: mine, stats, validate, fixture.

Every command is a pure function of its inputs and flags; identical
invocations produce byte-identical outputs. Data goes to stdout or the
requested file, diagnostics to stderr. Exit codes: 0 success (validation
passed), 1 validation mismatch or infeasible fixture, 2 usage/IO/parse
error.
"""

from __future__ import annotations

import argparse
import sys
from fractions import Fraction
from pathlib import Path
from typing import Optional, Sequence

from . import corpus
from .classify import classify_rules
from .datamodel import MiningConfig, Percent
from .ingest import (
    DataError,
    GoldenFileError,
    SchemaError,
    parse_golden_rules,
    parse_pct_bp,
    parse_schema,
    parse_transactions,
    render_transactions_csv,
)
from .report import frequency_csv, render_rules, stats_table
from .rules import canonical_sort, derive_rules

EXIT_OK = 0
EXIT_MISMATCH = 1
EXIT_ERROR = 2


def _read(path: str) -> str:
    return Path(path).read_text(encoding="utf-8")


def _emit(text: str, out: Optional[str]) -> None:
    if out is None:
        sys.stdout.write(text)
    else:
        Path(out).write_text(text, encoding="utf-8")


def _confidence_from_flag(raw: str) -> Percent:
    try:
        bp = parse_pct_bp(raw)
    except ValueError:
        raise ValueError("confidence must be in [0,100]") from None
    if bp > 10_000:
        raise ValueError("confidence must be in [0,100]")
    return Percent.from_basis_points(bp)


def _positive_int(raw: str) -> int:
    value = int(raw)
    if value < 1:
        raise argparse.ArgumentTypeError("must be a positive integer")
    return value


def _cmd_mine(args: argparse.Namespace) -> int:
    schema = parse_schema(_read(args.schema))
    db = parse_transactions(schema, _read(args.data))
    config = MiningConfig(
        min_confidence=_confidence_from_flag(args.min_conf),
        min_coverage_count=args.min_coverage_count,
        max_antecedent_size=args.max_antecedent,
    )
    ruleset = canonical_sort(derive_rules(db, config, workers=args.threads))
    document = render_rules(schema.catalog, classify_rules(ruleset), args.format)
    _emit(document, args.out)
    return EXIT_OK


def _cmd_stats(args: argparse.Namespace) -> int:
    schema = parse_schema(_read(args.schema))
    db = parse_transactions(schema, _read(args.data))
    table = stats_table(db, aggregates=corpus.study_aggregate_groups(schema.catalog))
    _emit(frequency_csv(table, mode="round"), args.out)
    return EXIT_OK


def _cmd_validate(args: argparse.Namespace) -> int:
    golden = parse_golden_rules(_read(args.golden))
    mined = corpus.parse_rules_csv(_read(args.mined))
    tolerance = Fraction(args.tolerance)
    if args.subset == "single-antecedent":
        golden = [g for g in golden if len(g.antecedent_items) == 1]
    report = corpus.validate_rows_against_golden(mined, golden, tolerance)
    sys.stdout.write(report.render())
    return EXIT_OK if report.ok else EXIT_MISMATCH


def _cmd_fixture(args: argparse.Namespace) -> int:
    counts = corpus.study_group_counts()
    golden = corpus.load_golden_rules()
    result = corpus.build_fixture(counts, golden)
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    (out_dir / "schema_appendix_a.txt").write_text(corpus.schema_text(), encoding="utf-8")
    (out_dir / "fixture_data.csv").write_text(
        render_transactions_csv(result.database), encoding="utf-8"
    )
    (out_dir / "construction_report.txt").write_text(result.report.render(), encoding="utf-8")
    print(f"wrote fixture files to {out_dir}", file=sys.stderr)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="siterules",
        description="Constrained association-rule mining over checklist data.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    mine = sub.add_parser("mine", help="mine, classify and render rules")
    mine.add_argument("--schema", required=True)
    mine.add_argument("--data", required=True)
    mine.add_argument("--min-conf", default="90", help="minimum confidence percent")
    mine.add_argument("--max-antecedent", type=_positive_int, default=2)
    mine.add_argument("--min-coverage-count", type=_positive_int, default=1)
    mine.add_argument("--format", choices=("csv", "text"), default="csv")
    mine.add_argument("--out")
    mine.add_argument("--threads", type=_positive_int, default=1)
    mine.set_defaults(handler=_cmd_mine)

    stats = sub.add_parser("stats", help="per-facility frequency table")
    stats.add_argument("--schema", required=True)
    stats.add_argument("--data", required=True)
    stats.add_argument("--out")
    stats.set_defaults(handler=_cmd_stats)

    validate = sub.add_parser("validate", help="compare mined rules to a reference list")
    validate.add_argument("--mined", required=True)
    validate.add_argument("--golden", required=True)
    validate.add_argument("--tolerance", default="0.011", help="percentage points")
    validate.add_argument(
        "--subset", choices=("all", "single-antecedent"), default="all"
    )
    validate.set_defaults(handler=_cmd_validate)

    fixture = sub.add_parser("fixture", help="emit the reconstructed study fixture")
    fixture.add_argument("--out-dir", required=True)
    fixture.set_defaults(handler=_cmd_fixture)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.handler(args)
    except corpus.InfeasibleFixtureError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_MISMATCH
    except (SchemaError, DataError, GoldenFileError, OSError, ValueError, ZeroDivisionError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
