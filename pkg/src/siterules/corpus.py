"""Embedded study corpus: reference schema, transcribed rules, published
frequency targets, and a constraint-based fixture reconstruction.

The original per-company checklist answers were never published; what
survives is the 68-rule reference list (appendix_b.csv), whose support
column pins antecedent group sizes, and a per-facility frequency table.
``build_fixture`` reconstructs a 91-row database that reproduces every count
those published figures pin down exactly: single and pairwise demographic
group sizes, the joint count implied by each reference rule, and each
facility's overall count. The remaining per-group frequency cells are
satisfied wherever simultaneously possible; the published table is not fully
self-consistent (four rows have a group column that contradicts the row's
own total), so the leftovers are reported, not forced.

All searches are deterministic: cells are enumerated smallest-index-first
and candidate values highest-first, so repeated builds are byte-identical.
"""

from __future__ import annotations

import csv
import itertools
from dataclasses import dataclass
from fractions import Fraction
from importlib.resources import files
from typing import Iterable, Iterator, Optional, Sequence

from .classify import ClassifiedRule, classify_rule
from .datamodel import (
    ItemCatalog,
    ItemClass,
    Rule,
    Transaction,
    TransactionDatabase,
)
from .engine import count_support
from .ingest import GoldenRule, Schema, parse_golden_rules, parse_pct_bp, parse_schema
from .report import RULES_HEADER


class InfeasibleFixtureError(Exception):
    """The mandatory fixture constraints admit no database (or embedded data
    failed an integrality check). Indicates a transcription error."""


# ---------------------------------------------------------------------------
# packaged data


def schema_text() -> str:
    return (files("siterules") / "data" / "schema_appendix_a.txt").read_text("utf-8")


def golden_text() -> str:
    return (files("siterules") / "data" / "appendix_b.csv").read_text("utf-8")


def load_study_schema() -> Schema:
    return parse_schema(schema_text())


def load_golden_rules() -> list[GoldenRule]:
    return parse_golden_rules(golden_text())


# ---------------------------------------------------------------------------
# published percentages, in basis points (hundredths of a percent)

M_ACCESSIBLE = 91

# Antecedent group shares from the reference rules' support column
# (two-decimal truncation of count/91).
_SINGLE_BP = {
    ("age", "below10"): 1208,
    ("age", "11-29"): 3846,
    ("age", "above30"): 4945,
    ("ownership", "governmental"): 5384,
    ("ownership", "private"): 3076,
    ("ownership", "semiprivate"): 1538,
    ("industry", "products"): 4835,
    ("industry", "services"): 5164,
}

_PAIR_BP = {
    frozenset({("age", "11-29"), ("ownership", "governmental")}): 2197,
    frozenset({("age", "above30"), ("ownership", "governmental")}): 3076,
    frozenset({("age", "above30"), ("ownership", "private")}): 1208,
    frozenset({("age", "11-29"), ("industry", "products")}): 1648,
    frozenset({("age", "above30"), ("industry", "products")}): 2857,
    frozenset({("age", "11-29"), ("industry", "services")}): 2197,
    frozenset({("age", "above30"), ("industry", "services")}): 2087,
    frozenset({("ownership", "governmental"), ("industry", "products")}): 3296,
    frozenset({("ownership", "governmental"), ("industry", "services")}): 2087,
    frozenset({("ownership", "private"), ("industry", "services")}): 2087,
}

# Published per-facility presence shares (rounded to two decimals), one row
# per facility: total, then the seven demographic group columns.
GROUP_COLUMNS = (
    "governmental",
    "private_semiprivate",
    "products",
    "services",
    "below10",
    "11-29",
    "above30",
)

_GROUP_DEFS: dict[str, tuple[tuple[str, str], ...]] = {
    "governmental": (("ownership", "governmental"),),
    "private_semiprivate": (("ownership", "private"), ("ownership", "semiprivate")),
    "products": (("industry", "products"),),
    "services": (("industry", "services"),),
    "below10": (("age", "below10"),),
    "11-29": (("age", "11-29"),),
    "above30": (("age", "above30"),),
}

# Columns that partition the database, per demographic attribute; used to
# reject a group target that contradicts the row total without searching.
_COLUMN_FAMILIES = (
    ("governmental", "private_semiprivate"),
    ("products", "services"),
    ("below10", "11-29", "above30"),
)

_FREQUENCY_BP = {
    #                      total   gov  p+s   prod  serv  <10  11-29  30+
    "about_us": (9560, 9796, 9286, 9773, 9362, 10000, 9714, 9333),
    "contact_us": (9780, 9592, 10000, 10000, 9574, 10000, 9429, 10000),
    "search_inside": (7473, 7551, 7381, 7273, 7660, 8182, 8571, 6444),
    "english_homepage": (7692, 8980, 6905, 7045, 8298, 3636, 8857, 7778),
    "english_contents": (7473, 8163, 6667, 7045, 7872, 2727, 8857, 7556),
    "related_links": (7692, 8571, 7143, 7045, 8298, 9091, 8286, 6889),
    "news_links": (6813, 6531, 7143, 6364, 7234, 7273, 7429, 6222),
    "personnel_login": (6374, 5306, 7619, 5909, 6809, 8182, 5143, 6889),
    "research_department": (5824, 5714, 5952, 6591, 5106, 5455, 4571, 6889),
    "links_to_others": (7033, 6939, 7143, 6591, 7447, 7273, 8000, 6222),
    "site_map": (7253, 7143, 7143, 6364, 7872, 6364, 7429, 7111),
    "page_titles": (6154, 5510, 6905, 6136, 6170, 6364, 6000, 6222),
    "load_time": (8681, 9184, 8095, 8409, 8936, 8182, 8857, 8889),
    "general_field_intro": (9121, 9592, 8571, 9318, 8936, 8182, 9143, 9333),
    "detailed_description": (5714, 5306, 6190, 5909, 5532, 5455, 5429, 6000),
    "submenus": (7912, 6939, 9048, 7955, 7872, 7273, 7714, 8222),
    "branches_info": (6264, 5714, 6905, 4773, 7660, 6364, 6286, 6222),
    "advertising": (7033, 6735, 7381, 6818, 7234, 7273, 6286, 7556),
    "at_a_glance": (9011, 8776, 9286, 8864, 9149, 9091, 8857, 9111),
    "at_a_glance_english": (6813, 7143, 6429, 5909, 7660, 5455, 7714, 6444),
}

_ATTRIBUTE_FAMILIES = (
    ("age", ("below10", "11-29", "above30")),
    ("ownership", ("governmental", "private", "semiprivate")),
    ("industry", ("products", "services")),
)


def _derived_count(bp: int, denominator: int, mode: str) -> int:
    """Integer count implied by a published two-decimal percentage.

    The count is the nearest integer to bp*denominator/10000 and must
    reproduce the published figure when re-rendered in the source table's
    mode (truncate for the rule list, round for the frequency table).
    """
    count = (bp * denominator + 5000) // 10000
    if mode == "truncate":
        ok = (10_000 * count) // denominator == bp
    else:
        ok = (2 * 10_000 * count + denominator) // (2 * denominator) == bp
    if not (ok and 0 <= count <= denominator):
        raise InfeasibleFixtureError(
            f"embedded figure {bp / 100:.2f}% of {denominator} fails its integrality check"
        )
    return count


def _implied_joint(confidence_bp: int, antecedent_count: int) -> tuple[int, Fraction]:
    """Joint count implied by a published confidence, with its deviation."""
    scaled = confidence_bp * antecedent_count
    joint = (scaled + 5000) // 10000
    deviation = Fraction(abs(scaled - 10_000 * joint), 10_000)
    return joint, deviation


@dataclass(frozen=True)
class StudyCounts:
    """Integer counts recovered from the published percentages."""

    m: int
    single_counts: dict
    pair_counts: dict
    facility_counts: dict
    group_sizes: dict

    def item_count(self, attribute: str, value: str) -> int:
        return self.single_counts[(attribute, value)]

    def pair_count(self, first: tuple[str, str], second: tuple[str, str]) -> Optional[int]:
        return self.pair_counts.get(frozenset({first, second}))


def study_group_counts() -> StudyCounts:
    """The embedded constants, re-verified on every call.

    Raises :class:`InfeasibleFixtureError` if any published figure stops
    reproducing under its table's rounding mode (i.e. a transcription error).
    """
    singles = {
        pair: _derived_count(bp, M_ACCESSIBLE, "truncate") for pair, bp in _SINGLE_BP.items()
    }
    for attr, values in _ATTRIBUTE_FAMILIES:
        total = sum(singles[(attr, v)] for v in values)
        if total != M_ACCESSIBLE:
            raise InfeasibleFixtureError(f"{attr} group counts sum to {total}, not {M_ACCESSIBLE}")
    pairs = {}
    for key, bp in _PAIR_BP.items():
        count = _derived_count(bp, M_ACCESSIBLE, "truncate")
        for pair in key:
            if count > singles[pair]:
                raise InfeasibleFixtureError(f"pair count {count} exceeds its marginal {pair}")
        pairs[key] = count

    group_sizes = {"total": M_ACCESSIBLE}
    for column, members in _GROUP_DEFS.items():
        group_sizes[column] = sum(singles[pair] for pair in members)

    facility_counts = {}
    for facility, row in _FREQUENCY_BP.items():
        targets = {"total": _derived_count(row[0], M_ACCESSIBLE, "round")}
        for column, bp in zip(GROUP_COLUMNS, row[1:]):
            targets[column] = _derived_count(bp, group_sizes[column], "round")
        facility_counts[facility] = targets
    return StudyCounts(M_ACCESSIBLE, singles, pairs, facility_counts, group_sizes)


# ---------------------------------------------------------------------------
# arithmetic consistency of the transcribed rules


@dataclass(frozen=True)
class ArithmeticCheckEntry:
    rule_id: int
    antecedent_count: int
    joint_count: int
    deviation: Fraction
    consistent: bool


@dataclass(frozen=True)
class ArithmeticReport:
    entries: tuple[ArithmeticCheckEntry, ...]

    @property
    def violations(self) -> tuple[ArithmeticCheckEntry, ...]:
        return tuple(e for e in self.entries if not e.consistent)

    @property
    def ok(self) -> bool:
        return not self.violations


def arithmetic_consistency_check(
    golden: Sequence[GoldenRule], counts: StudyCounts
) -> ArithmeticReport:
    """Check each transcribed rule's confidence implies a near-integer joint.

    The antecedent count is recovered from the rule's support column; the
    published confidence times that count must land within 0.01 of an
    integer, since a two-decimal truncation of a ratio with denominator at
    most m/2 cannot stray further. Violations signal transcription errors.
    """
    entries = []
    for g in golden:
        n_antecedent = (g.support_bp * counts.m + 5000) // 10000
        joint, deviation = _implied_joint(g.confidence_bp, n_antecedent)
        entries.append(
            ArithmeticCheckEntry(
                g.rule_id, n_antecedent, joint, deviation, deviation <= Fraction(1, 100)
            )
        )
    return ArithmeticReport(tuple(entries))


def golden_as_rules(
    catalog: ItemCatalog, golden: Sequence[GoldenRule], m: int = M_ACCESSIBLE
) -> list[ClassifiedRule]:
    """Reconstruct classified rule objects from the transcribed figures."""
    out = []
    for g in golden:
        antecedent = tuple(sorted(catalog.resolve_pair(p) for p in g.antecedent_items))
        consequent = (catalog.resolve_pair(g.consequent_item),)
        n_antecedent = (g.support_bp * m + 5000) // 10000
        joint, _ = _implied_joint(g.confidence_bp, n_antecedent)
        out.append(classify_rule(Rule(antecedent, consequent, n_antecedent, joint, m)))
    return out


# ---------------------------------------------------------------------------
# deterministic integer feasibility search

_BIG = 1 << 30


def _iter_solutions(
    caps: Sequence[Optional[int]],
    constraints: Sequence[tuple[tuple[int, ...], int]],
) -> Iterator[tuple[int, ...]]:
    """Yield all non-negative integer assignments meeting every constraint.

    Each constraint is (variable indices, exact target sum). Variables are
    assigned in index order, candidate values highest-first, with interval
    propagation at every node, so solutions arrive in a fixed order.
    """
    n = len(caps)
    members = [tuple(idxs) for idxs, _ in constraints]
    by_var: list[list[int]] = [[] for _ in range(n)]
    for ci, idxs in enumerate(members):
        for j in idxs:
            by_var[j].append(ci)
    for j in range(n):
        if caps[j] is None and not by_var[j]:
            raise ValueError(f"variable {j} is unbounded")
    assignment = [0] * n
    remaining = [t for _, t in constraints]
    if any(r < 0 for r in remaining):
        return

    def dfs(i: int) -> Iterator[tuple[int, ...]]:
        if i == n:
            if all(r == 0 for r in remaining):
                yield tuple(assignment)
            return
        ub = [_BIG if caps[j] is None else caps[j] for j in range(i, n)]
        for ci, idxs in enumerate(members):
            rem = remaining[ci]
            for j in idxs:
                if j >= i and rem < ub[j - i]:
                    ub[j - i] = rem
        hi = ub[0]
        lo = 0
        for ci in by_var[i]:
            slack = sum(ub[j - i] for j in members[ci] if j > i)
            need = remaining[ci] - slack
            if need > lo:
                lo = need
        for value in range(hi, lo - 1, -1):
            assignment[i] = value
            for ci in by_var[i]:
                remaining[ci] -= value
            yield from dfs(i + 1)
            for ci in by_var[i]:
                remaining[ci] += value
        assignment[i] = 0

    yield from dfs(0)


def _first_solution(caps, constraints) -> Optional[tuple[int, ...]]:
    return next(_iter_solutions(caps, constraints), None)


# ---------------------------------------------------------------------------
# fixture construction


@dataclass(frozen=True)
class UnmetCell:
    facility: str
    column: str
    target: int
    achieved: int


@dataclass(frozen=True)
class ConstructionReport:
    m: int
    cell_sizes: tuple[tuple[str, int], ...]
    mandatory_rule_targets: int
    frequency_cells_total: int
    unmet_cells: tuple[UnmetCell, ...]

    def render(self) -> str:
        lines = [
            "fixture construction report",
            "===========================",
            f"transactions: {self.m} (excluded rows: 0)",
            "mandatory constraints satisfied: all demographic group counts, "
            f"{self.mandatory_rule_targets} reference-rule joint counts, "
            "all facility totals",
            "demographic cells:",
        ]
        lines += [f"  {label}: {size}" for label, size in self.cell_sizes]
        satisfied = self.frequency_cells_total - len(self.unmet_cells)
        lines.append(
            f"frequency-table group cells: {satisfied} of {self.frequency_cells_total} satisfied"
        )
        if self.unmet_cells:
            lines.append("unmet cells (published figure inconsistent with its row):")
            lines += [
                f"  {u.facility} {u.column}: target {u.target}, achieved {u.achieved}"
                for u in self.unmet_cells
            ]
        return "\n".join(lines) + "\n"


@dataclass(frozen=True)
class FixtureResult:
    database: TransactionDatabase
    report: ConstructionReport


def _demographic_cells(catalog: ItemCatalog) -> list[tuple[tuple[str, str], ...]]:
    demo_attrs = [a for a in catalog.attributes if a.item_class is ItemClass.DEMOGRAPHIC]
    axes = [[(a.name, v) for v in a.values] for a in demo_attrs]
    return [tuple(cell) for cell in itertools.product(*axes)]


def _complete_pair_counts(counts: StudyCounts) -> dict:
    """Fill in unpublished pairwise cells that the marginals force.

    Every pairwise table row/column with a single unknown cell is resolved
    against its published marginal; repeating to a fixpoint leaves only
    genuinely free cells open.
    """
    known = dict(counts.pair_counts)

    def resolve(fixed: tuple[str, str], over_attr: str, over_values: Sequence[str]) -> bool:
        keys = [frozenset({fixed, (over_attr, v)}) for v in over_values]
        unknown = [k for k in keys if k not in known]
        partial = sum(known[k] for k in keys if k in known)
        total = counts.single_counts[fixed]
        if not unknown:
            if partial != total:
                raise InfeasibleFixtureError(
                    f"pairwise counts for {fixed} sum to {partial}, expected {total}"
                )
            return False
        if len(unknown) == 1:
            value = total - partial
            if value < 0:
                raise InfeasibleFixtureError(f"pairwise counts for {fixed} overshoot {total}")
            known[unknown[0]] = value
            return True
        return False

    changed = True
    while changed:
        changed = False
        for (attr_a, values_a), (attr_b, values_b) in itertools.combinations(
            _ATTRIBUTE_FAMILIES, 2
        ):
            for va in values_a:
                changed |= resolve((attr_a, va), attr_b, values_b)
            for vb in values_b:
                changed |= resolve((attr_b, vb), attr_a, values_a)
    return known


def _demographic_constraints(
    counts: StudyCounts, cells: Sequence[tuple[tuple[str, str], ...]]
) -> list[tuple[tuple[int, ...], int]]:
    constraints = [(tuple(range(len(cells))), counts.m)]
    for pair, count in counts.single_counts.items():
        idxs = tuple(ci for ci, cell in enumerate(cells) if pair in cell)
        constraints.append((idxs, count))
    for key, count in _complete_pair_counts(counts).items():
        idxs = tuple(ci for ci, cell in enumerate(cells) if key <= set(cell))
        constraints.append((idxs, count))
    return constraints


def _facility_mandatory(
    facility: str,
    counts: StudyCounts,
    golden: Sequence[GoldenRule],
    cells: Sequence[tuple[tuple[str, str], ...]],
    sizes: Sequence[int],
) -> list[tuple[tuple[int, ...], int]]:
    by_cells: dict[tuple[int, ...], int] = {
        tuple(range(len(cells))): counts.facility_counts[facility]["total"]
    }
    for g in golden:
        if g.consequent_item != ("facility", facility):
            continue
        wanted = set(g.antecedent_items)
        idxs = tuple(ci for ci, cell in enumerate(cells) if wanted <= set(cell))
        n_antecedent = sum(sizes[ci] for ci in idxs)
        expected = (g.support_bp * counts.m + 5000) // 10000
        if n_antecedent != expected:
            raise InfeasibleFixtureError(
                f"rule {g.rule_id}: antecedent group holds {n_antecedent} rows, "
                f"published support implies {expected}"
            )
        joint, deviation = _implied_joint(g.confidence_bp, n_antecedent)
        if deviation > Fraction(1, 100):
            raise InfeasibleFixtureError(
                f"rule {g.rule_id}: confidence implies non-integer joint count"
            )
        if by_cells.setdefault(idxs, joint) != joint:
            raise InfeasibleFixtureError(f"rule {g.rule_id}: conflicting joint targets")
    return list(by_cells.items())


def _facility_assignment(
    facility: str,
    counts: StudyCounts,
    mandatory: list[tuple[tuple[int, ...], int]],
    cells: Sequence[tuple[tuple[str, str], ...]],
    sizes: Sequence[int],
) -> tuple[tuple[int, ...], list[UnmetCell]]:
    """Mandatory constraints plus a greedy, deterministic pass over the
    published group cells, each kept only if the set stays feasible."""
    column_idxs = {
        column: tuple(
            ci
            for ci, cell in enumerate(cells)
            if any(pair in cell for pair in _GROUP_DEFS[column])
        )
        for column in GROUP_COLUMNS
    }
    total = counts.facility_counts[facility]["total"]
    accepted = list(mandatory)
    accepted_columns: set[str] = set()
    unmet: list[tuple[str, int]] = []

    def family_conflict(candidate: str) -> bool:
        # a column that completes a partition family must agree with the total
        for family in _COLUMN_FAMILIES:
            if candidate not in family:
                continue
            others = [c for c in family if c != candidate]
            if all(c in accepted_columns for c in others):
                family_sum = sum(counts.facility_counts[facility][c] for c in family)
                return family_sum != total
        return False

    for column in GROUP_COLUMNS:
        target = counts.facility_counts[facility][column]
        candidate = (column_idxs[column], target)
        if family_conflict(column) or _first_solution(sizes, accepted + [candidate]) is None:
            unmet.append((column, target))
            continue
        accepted.append(candidate)
        accepted_columns.add(column)

    final = _first_solution(sizes, accepted)
    if final is None:
        raise InfeasibleFixtureError(f"mandatory constraints infeasible for {facility}")
    unmet_cells = [
        UnmetCell(facility, column, target, sum(final[ci] for ci in column_idxs[column]))
        for column, target in unmet
    ]
    return final, unmet_cells


def build_fixture(counts: StudyCounts, golden: Sequence[GoldenRule]) -> FixtureResult:
    """Reconstruct a transaction database consistent with the published data.

    Demographic profiles are assigned first: the search enumerates cell-size
    tables meeting every published single and pairwise count and takes the
    first one under which every facility's mandatory constraint set stays
    feasible. Facility bits are then assigned per cell, and within a cell the
    first rows (by record id) carry each facility.
    """
    catalog = load_study_schema().catalog
    cells = _demographic_cells(catalog)
    facilities = [a.name for a in catalog.attributes if a.item_class is ItemClass.FACILITY]
    unknown = {g.consequent_item[1] for g in golden} - set(facilities)
    if unknown:
        raise InfeasibleFixtureError(f"reference rules name unknown facilities: {sorted(unknown)}")

    demographic = _demographic_constraints(counts, cells)
    caps: list[Optional[int]] = [None] * len(cells)
    sizes: Optional[tuple[int, ...]] = None
    mandatory_sets: dict[str, list] = {}
    for table in _iter_solutions(caps, demographic):
        candidate_sets = {
            f: _facility_mandatory(f, counts, golden, cells, table) for f in facilities
        }
        if all(
            _first_solution(table, constraint_set) is not None
            for constraint_set in candidate_sets.values()
        ):
            sizes = table
            mandatory_sets = candidate_sets
            break
    if sizes is None:
        raise InfeasibleFixtureError("no demographic table admits the mandatory constraints")

    assignments = {}
    unmet: list[UnmetCell] = []
    rule_targets = 0
    for facility in facilities:
        rule_targets += len(mandatory_sets[facility]) - 1  # total is not a rule target
        assignment, facility_unmet = _facility_assignment(
            facility, counts, mandatory_sets[facility], cells, sizes
        )
        assignments[facility] = assignment
        unmet.extend(facility_unmet)

    transactions = []
    record = 0
    for ci, cell in enumerate(cells):
        base = 0
        for pair in cell:
            base |= 1 << catalog.item_id(*pair)
        facility_bits = [
            (catalog.item_id(f, "yes"), assignments[f][ci]) for f in facilities
        ]
        for k in range(sizes[ci]):
            record += 1
            members = base
            for item_id, quota in facility_bits:
                if k < quota:
                    members |= 1 << item_id
            transactions.append(Transaction(f"C{record:03d}", members))
    db = TransactionDatabase.build(catalog, transactions, excluded_count=0)

    _verify_fixture(db, counts, golden)
    report = ConstructionReport(
        m=counts.m,
        cell_sizes=tuple(
            (" ".join(f"{a}={v}" for a, v in cell), sizes[ci]) for ci, cell in enumerate(cells)
        ),
        mandatory_rule_targets=rule_targets,
        frequency_cells_total=len(facilities) * len(GROUP_COLUMNS),
        unmet_cells=tuple(unmet),
    )
    return FixtureResult(db, report)


def _verify_fixture(
    db: TransactionDatabase, counts: StudyCounts, golden: Sequence[GoldenRule]
) -> None:
    catalog = db.catalog
    for (attr, value), expected in counts.single_counts.items():
        if count_support(db, (catalog.item_id(attr, value),)) != expected:
            raise InfeasibleFixtureError(f"fixture lost demographic count {attr}={value}")
    for facility, targets in counts.facility_counts.items():
        if count_support(db, (catalog.item_id(facility, "yes"),)) != targets["total"]:
            raise InfeasibleFixtureError(f"fixture lost facility total for {facility}")
    for g in golden:
        antecedent = [catalog.resolve_pair(p) for p in g.antecedent_items]
        joint, _ = _implied_joint(
            g.confidence_bp, (g.support_bp * counts.m + 5000) // 10000
        )
        if count_support(db, antecedent + [catalog.resolve_pair(g.consequent_item)]) != joint:
            raise InfeasibleFixtureError(f"fixture lost the joint count of rule {g.rule_id}")


def study_aggregate_groups(catalog: ItemCatalog) -> list[tuple[str, tuple[int, ...]]]:
    """The merged ownership column of the published frequency table, when the
    catalog carries the study's ownership values."""
    wanted = (("ownership", "private"), ("ownership", "semiprivate"))
    if all(catalog.has_item(a, v) for a, v in wanted):
        return [
            (
                "ownership=private+semiprivate",
                tuple(catalog.item_id(a, v) for a, v in wanted),
            )
        ]
    return []


# ---------------------------------------------------------------------------
# validation against the reference rules


@dataclass(frozen=True)
class MinedRuleRow:
    """One row of a rendered rules CSV, as re-read for validation."""

    rule_id: int
    antecedent_items: tuple[tuple[str, str], ...]
    consequent_item: tuple[str, str]
    confidence_bp: int
    coverage_bp: int
    support_bp: int
    class_label: str


def parse_rules_csv(text: str) -> list[MinedRuleRow]:
    reader = csv.reader(text.splitlines())
    try:
        header = next(reader)
    except StopIteration:
        raise ValueError("missing header row") from None
    if header != RULES_HEADER:
        raise ValueError(f"expected header {','.join(RULES_HEADER)}")
    rows = []
    for rowno, row in enumerate(reader, start=2):
        if len(row) != len(RULES_HEADER):
            raise ValueError(f"row {rowno}: expected {len(RULES_HEADER)} cells")
        try:
            antecedent = tuple(
                _split_pair(part) for part in row[1].split(" AND ")
            )
            rows.append(
                MinedRuleRow(
                    rule_id=int(row[0]),
                    antecedent_items=antecedent,
                    consequent_item=_split_pair(row[2]),
                    confidence_bp=parse_pct_bp(row[3]),
                    coverage_bp=parse_pct_bp(row[4]),
                    support_bp=parse_pct_bp(row[5]),
                    class_label=row[6],
                )
            )
        except ValueError as exc:
            raise ValueError(f"row {rowno}: {exc}") from None
    return rows


def _split_pair(text: str) -> tuple[str, str]:
    attr, sep, value = text.partition("=")
    if not sep or not attr or not value:
        raise ValueError(f"malformed item {text!r}")
    return (attr, value)


@dataclass(frozen=True)
class RuleView:
    antecedent_items: tuple[tuple[str, str], ...]
    consequent_item: tuple[str, str]
    confidence_pct: Fraction
    coverage_pct: Fraction

    @property
    def key(self):
        return (frozenset(self.antecedent_items), self.consequent_item)

    def describe(self) -> str:
        antecedent = " AND ".join(f"{a}={v}" for a, v in self.antecedent_items)
        return f"{antecedent} => {self.consequent_item[0]}={self.consequent_item[1]}"


@dataclass(frozen=True)
class MetricMismatch:
    golden: GoldenRule
    mined: RuleView
    confidence_delta_pp: Fraction
    coverage_delta_pp: Fraction


@dataclass(frozen=True)
class ValidationReport:
    matched: tuple[tuple[GoldenRule, RuleView], ...]
    missing: tuple[GoldenRule, ...]
    extra: tuple[RuleView, ...]
    metric_mismatches: tuple[MetricMismatch, ...]
    tolerance_pp: Fraction

    @property
    def ok(self) -> bool:
        return not self.missing and not self.metric_mismatches

    def render(self) -> str:
        lines = [
            f"matched: {len(self.matched)}  missing: {len(self.missing)}  "
            f"extra: {len(self.extra)}  metric mismatches: {len(self.metric_mismatches)}"
        ]
        if self.missing:
            lines.append("missing reference rules:")
            lines += [
                f"  #{g.rule_id} "
                + " AND ".join(f"{a}={v}" for a, v in g.antecedent_items)
                + f" => {g.consequent_item[0]}={g.consequent_item[1]}"
                for g in self.missing
            ]
        if self.metric_mismatches:
            lines.append(f"metric mismatches (tolerance {float(self.tolerance_pp)} pp):")
            for mm in self.metric_mismatches:
                lines.append(
                    f"  #{mm.golden.rule_id} {mm.mined.describe()}: "
                    f"confidence off by {float(mm.confidence_delta_pp):.4f} pp, "
                    f"coverage off by {float(mm.coverage_delta_pp):.4f} pp"
                )
        if self.extra:
            lines.append("extra mined rules (allowed, not published):")
            lines += [
                f"  {v.describe()} (confidence {float(v.confidence_pct):.2f}, "
                f"coverage {float(v.coverage_pct):.2f})"
                for v in self.extra
            ]
        return "\n".join(lines) + "\n"


DEFAULT_TOLERANCE_PP = Fraction(11, 1000)


def _match(
    views: Iterable[RuleView],
    golden: Sequence[GoldenRule],
    tolerance_pp: Fraction,
) -> ValidationReport:
    by_key: dict = {}
    for view in views:
        if view.key in by_key:
            raise ValueError(f"duplicate mined rule {view.describe()}")
        by_key[view.key] = view
    matched = []
    missing = []
    mismatches = []
    for g in golden:
        view = by_key.pop(g.key, None)
        if view is None:
            missing.append(g)
            continue
        matched.append((g, view))
        confidence_delta = abs(view.confidence_pct - g.confidence_pct())
        coverage_delta = abs(view.coverage_pct - g.support_pct())
        if confidence_delta > tolerance_pp or coverage_delta > tolerance_pp:
            mismatches.append(MetricMismatch(g, view, confidence_delta, coverage_delta))
    return ValidationReport(
        tuple(matched), tuple(missing), tuple(by_key.values()), tuple(mismatches), tolerance_pp
    )


def validate_against_golden(
    catalog: ItemCatalog,
    classified: Iterable[ClassifiedRule],
    golden: Sequence[GoldenRule],
    tolerance_pp: Fraction = DEFAULT_TOLERANCE_PP,
) -> ValidationReport:
    """Match mined rules against the reference list by item sets.

    A reference rule is matched when a mined rule has the same antecedent
    set and consequent; the match is clean when the mined exact confidence
    and coverage sit within ``tolerance_pp`` percentage points of the
    published two-decimal figures. Surplus mined rules are listed, never
    failed: the reference list only covers what its authors printed.
    """
    if tolerance_pp < 0:
        raise ValueError("tolerance must be non-negative")
    views = [
        RuleView(
            antecedent_items=tuple(catalog.item_pair(i) for i in entry.rule.antecedent),
            consequent_item=catalog.item_pair(entry.rule.consequent[0]),
            confidence_pct=entry.rule.confidence.pct_fraction(),
            coverage_pct=entry.rule.coverage.pct_fraction(),
        )
        for entry in classified
    ]
    return _match(views, golden, tolerance_pp)


def validate_rows_against_golden(
    rows: Iterable[MinedRuleRow],
    golden: Sequence[GoldenRule],
    tolerance_pp: Fraction = DEFAULT_TOLERANCE_PP,
) -> ValidationReport:
    """File-level variant of :func:`validate_against_golden` for rendered CSVs."""
    if tolerance_pp < 0:
        raise ValueError("tolerance must be non-negative")
    views = [
        RuleView(
            antecedent_items=row.antecedent_items,
            consequent_item=row.consequent_item,
            confidence_pct=Fraction(row.confidence_bp, 100),
            coverage_pct=Fraction(row.coverage_bp, 100),
        )
        for row in rows
    ]
    return _match(views, golden, tolerance_pp)
