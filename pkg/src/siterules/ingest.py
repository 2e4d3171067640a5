"""Parsers for the schema file, the transaction CSV, and reference rule CSVs.

The schema file is line oriented; ``#`` starts a comment. Three declaration
forms are accepted:

    attribute <name> categorical <antecedent|consequent> values: v1, v2, ...
    attribute <name> numeric <antecedent|consequent> bins: 0-10=a, 11-29=b, 30-=c
    facility <name> "<description>"

``facility`` is sugar for a binary consequent attribute with the single item
value "yes". The transaction CSV has a ``record_id`` first column, then one
column per attribute (order-insensitive): categorical cells hold a declared
value, numeric cells an integer, facility cells a yes/no token or nothing.
A row whose facility cells are all empty is excluded from the database and
only counted; a partially empty facility row is an error.
"""

from __future__ import annotations

import csv
import re
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Sequence

from .datamodel import (
    AttributeDef,
    AttributeKind,
    ItemCatalog,
    ItemClass,
    NumericBin,
    Transaction,
    TransactionDatabase,
)

YES_TOKENS = frozenset({"y", "yes", "1"})
NO_TOKENS = frozenset({"n", "no", "0"})

_ATTR_RE = re.compile(
    r"^attribute\s+(?P<name>\S+)\s+(?P<kind>\S+)\s+(?P<cls>\S+)\s+(?P<list>values|bins):\s*(?P<body>.+)$"
)
_FACILITY_RE = re.compile(r'^facility\s+(?P<name>\S+)\s+"(?P<desc>[^"]*)"$')
_BIN_RE = re.compile(r"^(?P<lo>\d+)-(?P<hi>\d*)=(?P<label>[^\s,]+)$")

_CLASS_KEYWORDS = {"antecedent": ItemClass.DEMOGRAPHIC, "consequent": ItemClass.FACILITY}


class SchemaError(ValueError):
    """Schema file rejected; the message carries the offending line number."""


class DataError(ValueError):
    """Transaction CSV rejected; the message carries the offending row."""


class GoldenFileError(ValueError):
    """Reference-rule CSV rejected."""


@dataclass(frozen=True)
class Schema:
    """A parsed schema: the catalog plus the declaration-ordered attributes."""

    catalog: ItemCatalog

    @property
    def attributes(self) -> tuple[AttributeDef, ...]:
        return self.catalog.attributes


def _parse_bins(body: str, lineno: int) -> tuple[NumericBin, ...]:
    bins = []
    for part in (p.strip() for p in body.split(",")):
        m = _BIN_RE.match(part)
        if m is None:
            raise SchemaError(f"line {lineno}: malformed bin {part!r}")
        lo = int(m.group("lo"))
        hi = int(m.group("hi")) if m.group("hi") else None
        if hi is not None and hi < lo:
            raise SchemaError(f"line {lineno}: bin {part!r} is empty")
        bins.append(NumericBin(lo, hi, m.group("label")))
    for prev, cur in zip(bins, bins[1:]):
        if prev.hi is None or cur.lo <= prev.hi:
            raise SchemaError(f"line {lineno}: bins must be ordered and non-overlapping")
    return tuple(bins)


def parse_schema(text: str) -> Schema:
    """Parse a schema file into a :class:`Schema`.

    The resulting catalog lists all demographic items first, in declaration
    order, then all facility items.
    """
    attributes: list[AttributeDef] = []
    seen: set[str] = set()
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("attribute"):
            m = _ATTR_RE.match(line)
            if m is None:
                raise SchemaError(f"line {lineno}: malformed attribute declaration")
            name, kind_word, cls_word = m.group("name"), m.group("kind"), m.group("cls")
            if kind_word not in ("categorical", "numeric"):
                raise SchemaError(f"line {lineno}: unknown attribute kind {kind_word!r}")
            if cls_word not in _CLASS_KEYWORDS:
                raise SchemaError(f"line {lineno}: unknown class keyword {cls_word!r}")
            item_class = _CLASS_KEYWORDS[cls_word]
            if kind_word == "categorical":
                if m.group("list") != "values":
                    raise SchemaError(f"line {lineno}: categorical attributes take 'values:'")
                values = tuple(v.strip() for v in m.group("body").split(","))
                if any(not v for v in values):
                    raise SchemaError(f"line {lineno}: empty value in list")
                attr = AttributeDef(name, AttributeKind.CATEGORICAL, item_class, values)
            else:
                if m.group("list") != "bins":
                    raise SchemaError(f"line {lineno}: numeric attributes take 'bins:'")
                bins = _parse_bins(m.group("body"), lineno)
                labels = tuple(b.label for b in bins)
                if len(set(labels)) != len(labels):
                    raise SchemaError(f"line {lineno}: duplicate bin labels")
                attr = AttributeDef(name, AttributeKind.NUMERIC, item_class, labels, bins)
        elif line.startswith("facility"):
            m = _FACILITY_RE.match(line)
            if m is None:
                raise SchemaError(f"line {lineno}: malformed facility declaration")
            attr = AttributeDef(
                m.group("name"),
                AttributeKind.BINARY,
                ItemClass.FACILITY,
                ("yes",),
                description=m.group("desc"),
            )
        else:
            raise SchemaError(f"line {lineno}: unrecognized declaration {line.split()[0]!r}")
        if attr.name in seen:
            raise SchemaError(f"line {lineno}: duplicate attribute {attr.name!r}")
        seen.add(attr.name)
        attributes.append(attr)
    if not attributes:
        raise SchemaError("no attributes declared")
    return Schema(ItemCatalog(tuple(attributes)))


def bin_numeric(value: float, bins: Sequence[NumericBin]) -> str:
    """Label of the unique bin containing ``value``.

    Bin endpoints are inclusive on both sides, so integer-year bins partition
    the integers but leave fractional values between bins unassigned.
    """
    for b in bins:
        if b.contains(value):
            return b.label
    raise ValueError(f"value {value} falls in no bin")


def _facility_token(cell: str) -> Optional[bool]:
    token = cell.strip().lower()
    if not token:
        return None
    if token in YES_TOKENS:
        return True
    if token in NO_TOKENS:
        return False
    raise ValueError(f"unrecognized yes/no token {cell!r}")


def parse_transactions(schema: Schema, text: str) -> TransactionDatabase:
    """Materialize a transaction database from CSV contents."""
    catalog = schema.catalog
    reader = csv.reader(text.splitlines())
    try:
        header = next(reader)
    except StopIteration:
        raise DataError("missing header row") from None
    if not header or header[0] != "record_id":
        raise DataError("first column must be 'record_id'")
    declared = {a.name for a in catalog.attributes}
    for col in header[1:]:
        if col not in declared:
            raise DataError(f"unknown column {col!r}")
    missing = declared - set(header[1:])
    if missing:
        raise DataError(f"missing columns: {', '.join(sorted(missing))}")
    if len(header) != len(declared) + 1:
        raise DataError("duplicate columns in header")
    attr_by_col = [catalog.attribute(col) for col in header[1:]]
    facility_cols = [k for k, a in enumerate(attr_by_col) if a.kind is AttributeKind.BINARY]

    transactions: list[Transaction] = []
    seen_ids: set[str] = set()
    excluded = 0
    for rowno, row in enumerate(reader, start=2):
        if len(row) != len(header):
            raise DataError(f"row {rowno}: expected {len(header)} cells, got {len(row)}")
        record_id = row[0].strip()
        if not record_id:
            raise DataError(f"row {rowno}: empty record_id")
        if record_id in seen_ids:
            raise DataError(f"row {rowno}: duplicate record_id {record_id!r}")
        seen_ids.add(record_id)

        cells = row[1:]
        empties = [not cells[k].strip() for k in facility_cols]
        if facility_cols and all(empties):
            excluded += 1
            continue
        if any(empties):
            raise DataError(f"row {rowno}: facility cells must be all present or all empty")

        members = 0
        for cell, attr in zip(cells, attr_by_col):
            value = cell.strip()
            if attr.kind is AttributeKind.BINARY:
                try:
                    present = _facility_token(value)
                except ValueError as exc:
                    raise DataError(f"row {rowno}, column {attr.name!r}: {exc}") from None
                if present:
                    members |= 1 << catalog.item_id(attr.name, "yes")
                continue
            if not value:
                raise DataError(f"row {rowno}: empty value for attribute {attr.name!r}")
            if attr.kind is AttributeKind.NUMERIC:
                try:
                    number = int(value)
                except ValueError:
                    raise DataError(
                        f"row {rowno}, column {attr.name!r}: unparseable integer {value!r}"
                    ) from None
                try:
                    label = bin_numeric(number, attr.bins)
                except ValueError as exc:
                    raise DataError(f"row {rowno}, column {attr.name!r}: {exc}") from None
            else:
                if value not in attr.values:
                    raise DataError(
                        f"row {rowno}, column {attr.name!r}: value {value!r} not in schema"
                    )
                label = value
            members |= 1 << catalog.item_id(attr.name, label)
        transactions.append(Transaction(record_id, members))
    try:
        return TransactionDatabase.build(catalog, transactions, excluded)
    except ValueError as exc:
        raise DataError(str(exc)) from None


def _numeric_representative(attr: AttributeDef, label: str) -> str:
    for b in attr.bins:
        if b.label == label:
            return str(b.hi if b.hi is not None else b.lo)
    raise ValueError(f"no bin labelled {label!r} for attribute {attr.name!r}")


def render_transactions_csv(db: TransactionDatabase) -> str:
    """Serialize a database back to the transaction CSV format.

    Numeric cells are written as a representative integer of the transaction's
    bin, so re-parsing reproduces the same membership bits. Excluded rows are
    regenerated as synthetic all-empty rows to preserve the excluded count.
    """
    catalog = db.catalog
    header = ["record_id"] + [a.name for a in catalog.attributes]
    columns = [(a, catalog.ids_of_attribute(a.name)) for a in catalog.attributes]
    lines = [",".join(header)]
    for txn in db.transactions:
        cells = [txn.record_id]
        for attr, ids in columns:
            if attr.kind is AttributeKind.BINARY:
                cells.append("Y" if txn.contains(ids[0]) else "N")
                continue
            present = [i for i in ids if txn.contains(i)]
            if not present:
                cells.append("")
            elif attr.kind is AttributeKind.NUMERIC:
                cells.append(_numeric_representative(attr, catalog.item(present[0]).value))
            else:
                cells.append(catalog.item(present[0]).value)
        lines.append(",".join(cells))
    width = len(header) - 1
    for k in range(db.excluded_count):
        lines.append(",".join([f"__excluded_{k + 1}"] + [""] * width))
    return "\n".join(lines) + "\n"


_PCT_RE = re.compile(r"^(?P<whole>\d+)(?:\.(?P<frac>\d{1,2}))?$")


def parse_pct_bp(text: str) -> int:
    """Parse a percentage with up to two decimals into basis points (0.01%)."""
    m = _PCT_RE.match(text.strip())
    if m is None:
        raise ValueError(f"invalid percentage {text!r}")
    frac = (m.group("frac") or "").ljust(2, "0")
    return int(m.group("whole")) * 100 + int(frac)


@dataclass(frozen=True)
class GoldenRule:
    """One transcribed reference rule with its published two-decimal figures.

    Percentages are stored in basis points (hundredths of a percent) so
    comparisons stay exact. The published support column is the antecedent
    share of the database, i.e. what this package calls coverage.
    """

    rule_id: int
    antecedent_items: tuple[tuple[str, str], ...]
    consequent_item: tuple[str, str]
    confidence_bp: int
    support_bp: int

    @property
    def key(self) -> tuple[frozenset, tuple[str, str]]:
        return (frozenset(self.antecedent_items), self.consequent_item)

    def confidence_pct(self) -> Fraction:
        return Fraction(self.confidence_bp, 100)

    def support_pct(self) -> Fraction:
        return Fraction(self.support_bp, 100)


def _parse_item_text(text: str) -> tuple[str, str]:
    attr, sep, value = text.partition("=")
    if not sep or not attr.strip() or not value.strip():
        raise ValueError(f"malformed item {text!r}")
    return (attr.strip(), value.strip())


GOLDEN_HEADER = ["rule_id", "antecedent", "consequent", "confidence_pct", "support_pct"]


def parse_golden_rules(text: str) -> list[GoldenRule]:
    """Parse the transcribed reference rules, validating percentage ranges."""
    reader = csv.reader(text.splitlines())
    try:
        header = next(reader)
    except StopIteration:
        raise GoldenFileError("missing header row") from None
    if header != GOLDEN_HEADER:
        raise GoldenFileError(f"expected header {','.join(GOLDEN_HEADER)}")
    rules: list[GoldenRule] = []
    seen_ids: set[int] = set()
    for rowno, row in enumerate(reader, start=2):
        if len(row) != len(GOLDEN_HEADER):
            raise GoldenFileError(f"row {rowno}: expected {len(GOLDEN_HEADER)} cells")
        try:
            rule_id = int(row[0])
            antecedent = tuple(_parse_item_text(part) for part in row[1].split(" AND "))
            consequent = _parse_item_text(row[2])
            confidence_bp = parse_pct_bp(row[3])
            support_bp = parse_pct_bp(row[4])
        except ValueError as exc:
            raise GoldenFileError(f"row {rowno}: {exc}") from None
        if rule_id in seen_ids:
            raise GoldenFileError(f"row {rowno}: duplicate rule_id {rule_id}")
        seen_ids.add(rule_id)
        if len(set(antecedent)) != len(antecedent):
            raise GoldenFileError(f"row {rowno}: malformed antecedent (repeated item)")
        if confidence_bp < 9000:
            raise GoldenFileError(f"row {rowno}: confidence below 90")
        if confidence_bp > 10000:
            raise GoldenFileError(f"row {rowno}: confidence above 100")
        if not 0 < support_bp <= 10000:
            raise GoldenFileError(f"row {rowno}: support out of range")
        rules.append(GoldenRule(rule_id, antecedent, consequent, confidence_bp, support_bp))
    return rules
