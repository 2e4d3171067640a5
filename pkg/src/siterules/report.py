"""Rendering: two-decimal percent formatting, frequency tables, rule output.

Two formatting modes exist because the published tables this package
reproduces mix conventions: the detailed rule list truncates to two decimals
while the frequency table rounds. Rule output therefore defaults to truncate
and frequency tables to round. All rendering is byte-deterministic.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Literal, Optional, Sequence

from .classify import ClassifiedRule
from .datamodel import ItemCatalog, ItemClass, Percent, TransactionDatabase

FormatMode = Literal["truncate", "round"]


def format_percent(value: Percent, mode: FormatMode = "truncate") -> str:
    """Render an exact ratio as a percentage with exactly two decimals.

    ``truncate`` drops everything beyond the second decimal; ``round`` rounds
    half away from zero. Pure integer arithmetic either way.
    """
    scaled = 10_000 * value.numerator
    if mode == "truncate":
        q = scaled // value.denominator
    elif mode == "round":
        q = (2 * scaled + value.denominator) // (2 * value.denominator)
    else:
        raise ValueError(f"unknown format mode {mode!r}")
    return f"{q // 100}.{q % 100:02d}"


@dataclass(frozen=True)
class GroupColumn:
    """One frequency-table column: a label and the item ids whose union of
    transactions forms the group. Aggregates merge several items."""

    label: str
    item_ids: tuple[int, ...]
    aggregate: bool = False


@dataclass(frozen=True)
class FrequencyRow:
    facility: str
    cells: tuple[Optional[Percent], ...]


@dataclass(frozen=True)
class FrequencyTable:
    columns: tuple[GroupColumn, ...]
    rows: tuple[FrequencyRow, ...]


def stats_table(
    db: TransactionDatabase,
    aggregates: Sequence[tuple[str, Sequence[int]]] = (),
) -> FrequencyTable:
    """Per-facility presence shares: overall, then per demographic group.

    The cell for facility f and group g is count(f and g) / count(g); the
    overall column divides by the database size. A group with no members
    yields an empty cell rather than a division by zero. ``aggregates`` adds
    merged columns (label, item ids) whose members are the union of the
    listed items' transactions.
    """
    if db.size == 0:
        raise ValueError("cannot tabulate an empty database")
    catalog = db.catalog
    columns = [GroupColumn("total", ())]
    columns += [
        GroupColumn(catalog.item_label(i), (i,))
        for i in catalog.ids_of_class(ItemClass.DEMOGRAPHIC)
    ]
    columns += [GroupColumn(label, tuple(ids), aggregate=True) for label, ids in aggregates]

    all_mask = (1 << db.size) - 1
    group_vectors = [
        all_mask if not col.item_ids else _union_vector(db, col.item_ids) for col in columns
    ]
    rows = []
    for fid in catalog.ids_of_class(ItemClass.FACILITY):
        fvec = db.item_vector(fid)
        cells: list[Optional[Percent]] = []
        for gvec in group_vectors:
            size = gvec.bit_count()
            if size == 0:
                cells.append(None)
            else:
                cells.append(Percent((fvec & gvec).bit_count(), size))
        rows.append(FrequencyRow(catalog.item(fid).attribute, tuple(cells)))
    return FrequencyTable(tuple(columns), tuple(rows))


def _union_vector(db: TransactionDatabase, ids: Sequence[int]) -> int:
    vec = 0
    for i in ids:
        vec |= db.item_vector(i)
    return vec


def frequency_csv(table: FrequencyTable, mode: FormatMode = "round") -> str:
    """CSV form of a frequency table; empty groups render as empty cells."""
    header = ["facility", "total_pct"] + [col.label for col in table.columns[1:]]
    lines = [",".join(header)]
    for row in table.rows:
        rendered = ["" if c is None else format_percent(c, mode) for c in row.cells]
        lines.append(",".join([row.facility] + rendered))
    return "\n".join(lines) + "\n"


RULES_HEADER = [
    "rule_id",
    "antecedent",
    "consequent",
    "confidence_pct",
    "coverage_pct",
    "support_pct",
    "class",
]


def render_rules(
    catalog: ItemCatalog,
    classified: Iterable[ClassifiedRule],
    fmt: Literal["csv", "text"] = "csv",
) -> str:
    """Serialize classified rules; ids are 1-based positions in the input.

    CSV percentages use truncate mode to match the convention of the
    published rule list. The text format is an aligned table of the same
    fields.
    """
    rows = []
    for k, entry in enumerate(classified, start=1):
        rule = entry.rule
        rows.append(
            [
                str(k),
                " AND ".join(catalog.item_label(i) for i in rule.antecedent),
                catalog.item_label(rule.consequent[0]),
                format_percent(rule.confidence, "truncate"),
                format_percent(rule.coverage, "truncate"),
                format_percent(rule.support, "truncate"),
                entry.rule_class.label,
            ]
        )
    if fmt == "csv":
        lines = [",".join(RULES_HEADER)] + [",".join(row) for row in rows]
        return "\n".join(lines) + "\n"
    if fmt != "text":
        raise ValueError(f"unknown rule format {fmt!r}")
    widths = [
        max([len(RULES_HEADER[c])] + [len(row[c]) for row in rows])
        for c in range(len(RULES_HEADER))
    ]
    def line(parts: Sequence[str]) -> str:
        return "  ".join(p.ljust(w) for p, w in zip(parts, widths)).rstrip()
    out = [line(RULES_HEADER), line(["-" * w for w in widths])]
    out += [line(row) for row in rows]
    return "\n".join(out) + "\n"


@dataclass(frozen=True)
class ConsequentGroup:
    consequent_label: str
    entries: tuple[ClassifiedRule, ...]


def group_by_consequent(
    catalog: ItemCatalog, classified: Iterable[ClassifiedRule]
) -> tuple[ConsequentGroup, ...]:
    """Group rules by consequent, largest group first (ties by label).

    Entries keep their input order, so feeding canonically sorted rules
    yields canonically sorted groups.
    """
    groups: dict[str, list[ClassifiedRule]] = {}
    for entry in classified:
        label = catalog.item_label(entry.rule.consequent[0])
        groups.setdefault(label, []).append(entry)
    ordered = sorted(groups.items(), key=lambda kv: (-len(kv[1]), kv[0]))
    return tuple(ConsequentGroup(label, tuple(entries)) for label, entries in ordered)


def render_consequent_groups(
    catalog: ItemCatalog, groups: Sequence[ConsequentGroup]
) -> str:
    """Readable listing of consequent groups and their antecedent profiles."""
    lines = []
    for group in groups:
        lines.append(f"{group.consequent_label} ({len(group.entries)} rules)")
        for k, entry in enumerate(group.entries, start=1):
            antecedent = " AND ".join(
                catalog.item_label(i) for i in entry.rule.antecedent
            )
            lines.append(f"  {k}. {antecedent} [{entry.rule_class.label}]")
    return "\n".join(lines) + "\n"
