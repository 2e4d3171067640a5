"""Core domain types: items, catalogs, transactions, databases, rules.

Every type here is immutable after construction. Metric values are stored as
integer count pairs (`Percent`) and compared by cross-multiplication, so
threshold and tie decisions never touch floating point; floats appear only
when a value is formatted for display.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from fractions import Fraction
from functools import total_ordering
from typing import Iterable, Optional, Sequence


class ItemClass(enum.Enum):
    """Which side of a rule an item may appear on."""

    DEMOGRAPHIC = "demographic"  # antecedent-eligible
    FACILITY = "facility"        # consequent-eligible


class AttributeKind(enum.Enum):
    CATEGORICAL = "categorical"
    NUMERIC = "numeric"
    BINARY = "binary"


@dataclass(frozen=True)
class NumericBin:
    """One labelled value range; ``hi=None`` means the range is open above."""

    lo: int
    hi: Optional[int]
    label: str

    def contains(self, value: float) -> bool:
        if value < self.lo:
            return False
        return self.hi is None or value <= self.hi


@dataclass(frozen=True)
class AttributeDef:
    """A declared attribute; expands to one item per value (or bin label)."""

    name: str
    kind: AttributeKind
    item_class: ItemClass
    values: tuple[str, ...]
    bins: tuple[NumericBin, ...] = ()
    description: str = ""

    def __post_init__(self) -> None:
        if not self.name:
            raise ValueError("attribute name must be non-empty")
        if not self.values:
            raise ValueError(f"attribute {self.name!r} declares no values")
        if len(set(self.values)) != len(self.values):
            raise ValueError(f"attribute {self.name!r} has duplicate values")
        if self.kind is AttributeKind.NUMERIC:
            if tuple(b.label for b in self.bins) != self.values:
                raise ValueError(f"attribute {self.name!r}: bin labels must match values")
        elif self.bins:
            raise ValueError(f"attribute {self.name!r}: only numeric attributes take bins")
        if self.kind is AttributeKind.BINARY and len(self.values) != 1:
            raise ValueError(f"attribute {self.name!r}: binary attributes have exactly one item")


@dataclass(frozen=True)
class ItemDef:
    attribute: str
    value: str
    item_class: ItemClass


@dataclass(frozen=True, eq=False)
class ItemCatalog:
    """The fixed item universe.

    Items are laid out demographic-first: every demographic attribute's items
    (in declaration order), then every facility attribute's items. An item's
    id is its position in that layout and never changes.
    """

    attributes: tuple[AttributeDef, ...]
    items: tuple[ItemDef, ...] = field(init=False, repr=False)
    _index: dict = field(init=False, repr=False)

    def __post_init__(self) -> None:
        names = [a.name for a in self.attributes]
        if len(set(names)) != len(names):
            raise ValueError("duplicate attribute names in catalog")
        items: list[ItemDef] = []
        for wanted in (ItemClass.DEMOGRAPHIC, ItemClass.FACILITY):
            for attr in self.attributes:
                if attr.item_class is wanted:
                    items.extend(ItemDef(attr.name, v, wanted) for v in attr.values)
        index = {(it.attribute, it.value): iid for iid, it in enumerate(items)}
        object.__setattr__(self, "items", tuple(items))
        object.__setattr__(self, "_index", index)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, ItemCatalog):
            return NotImplemented
        return self.attributes == other.attributes

    @property
    def n_items(self) -> int:
        return len(self.items)

    def item(self, item_id: int) -> ItemDef:
        return self.items[item_id]

    def item_id(self, attribute: str, value: str) -> int:
        try:
            return self._index[(attribute, value)]
        except KeyError:
            raise KeyError(f"no item {attribute}={value} in catalog") from None

    def has_item(self, attribute: str, value: str) -> bool:
        return (attribute, value) in self._index

    def attribute(self, name: str) -> AttributeDef:
        for attr in self.attributes:
            if attr.name == name:
                return attr
        raise KeyError(f"no attribute {name!r} in catalog")

    def ids_of_class(self, item_class: ItemClass) -> tuple[int, ...]:
        return tuple(i for i, it in enumerate(self.items) if it.item_class is item_class)

    def ids_of_attribute(self, name: str) -> tuple[int, ...]:
        return tuple(i for i, it in enumerate(self.items) if it.attribute == name)

    def item_pair(self, item_id: int) -> tuple[str, str]:
        """Textual identity of an item, as used in rule files.

        Demographic items are ``(attribute, value)``; facility items collapse
        to ``("facility", attribute)`` because their only value is "yes".
        """
        it = self.items[item_id]
        if it.item_class is ItemClass.FACILITY:
            return ("facility", it.attribute)
        return (it.attribute, it.value)

    def item_label(self, item_id: int) -> str:
        attr, value = self.item_pair(item_id)
        return f"{attr}={value}"

    def resolve_pair(self, pair: tuple[str, str]) -> int:
        """Item id for a ``(attribute, value)`` pair in item_pair convention."""
        attr, value = pair
        if attr == "facility":
            attr, value = value, "yes"
        return self.item_id(attr, value)


def itemset(ids: Iterable[int]) -> tuple[int, ...]:
    """Normalize item ids to the canonical sorted, duplicate-free tuple."""
    out = tuple(sorted(set(ids)))
    if out and out[0] < 0:
        raise ValueError("item ids must be non-negative")
    return out


@dataclass(frozen=True)
class Transaction:
    """One record: an id plus a bitmask with bit i set iff item i is present."""

    record_id: str
    members: int

    def __post_init__(self) -> None:
        if self.members < 0:
            raise ValueError("membership mask must be non-negative")

    def contains(self, item_id: int) -> bool:
        return bool(self.members >> item_id & 1)


def build_vertical_index(n_items: int, transactions: Sequence[Transaction]) -> tuple[int, ...]:
    """Transpose row bitmasks into one transaction bitset per item.

    Bit j of item i's vector is set iff transaction j contains item i. Columns
    are accumulated in bytearrays so the cost is one pass over the set bits.
    """
    width = (len(transactions) + 7) // 8 or 1
    cols = [bytearray(width) for _ in range(n_items)]
    for j, txn in enumerate(transactions):
        bits = txn.members
        byte, mask = j >> 3, 1 << (j & 7)
        while bits:
            low = bits & -bits
            cols[low.bit_length() - 1][byte] |= mask
            bits ^= low
    return tuple(int.from_bytes(col, "little") for col in cols)


@dataclass(frozen=True)
class TransactionDatabase:
    """An immutable transaction set plus its per-item vertical index.

    ``excluded_count`` records input rows that were dropped before the
    database was built (e.g. unreachable websites); they never enter any
    count and the database size ``m`` covers included rows only.
    """

    catalog: ItemCatalog
    transactions: tuple[Transaction, ...]
    excluded_count: int
    vertical_index: tuple[int, ...]

    def __post_init__(self) -> None:
        if self.excluded_count < 0:
            raise ValueError("excluded_count must be non-negative")
        if len(self.vertical_index) != self.catalog.n_items:
            raise ValueError("vertical index must have one vector per item")

    @classmethod
    def build(
        cls,
        catalog: ItemCatalog,
        transactions: Sequence[Transaction],
        excluded_count: int = 0,
    ) -> "TransactionDatabase":
        """Validate transactions against the catalog and index them."""
        n = catalog.n_items
        seen: set[str] = set()
        exclusive_masks = [
            sum(1 << i for i in catalog.ids_of_attribute(attr.name))
            for attr in catalog.attributes
            if attr.kind is not AttributeKind.BINARY
        ]
        for txn in transactions:
            if txn.record_id in seen:
                raise ValueError(f"duplicate record_id {txn.record_id!r}")
            seen.add(txn.record_id)
            if txn.members.bit_length() > n:
                raise ValueError(f"record {txn.record_id!r} sets an item id outside the catalog")
            for mask in exclusive_masks:
                if (txn.members & mask).bit_count() > 1:
                    raise ValueError(
                        f"record {txn.record_id!r} sets multiple values of one attribute"
                    )
        index = build_vertical_index(n, transactions)
        return cls(catalog, tuple(transactions), excluded_count, index)

    @property
    def size(self) -> int:
        return len(self.transactions)

    def item_vector(self, item_id: int) -> int:
        return self.vertical_index[item_id]


@total_ordering
@dataclass(frozen=True, eq=False)
class Percent:
    """An exact ratio of counts in [0, 1], compared by cross-multiplication."""

    numerator: int
    denominator: int

    def __post_init__(self) -> None:
        if self.denominator <= 0:
            raise ValueError("denominator must be positive")
        if not 0 <= self.numerator <= self.denominator:
            raise ValueError(
                f"numerator must lie in [0, denominator], got {self.numerator}/{self.denominator}"
            )

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Percent):
            return NotImplemented
        return self.numerator * other.denominator == other.numerator * self.denominator

    def __lt__(self, other: "Percent") -> bool:
        return self.numerator * other.denominator < other.numerator * self.denominator

    def __hash__(self) -> int:
        return hash(Fraction(self.numerator, self.denominator))

    @classmethod
    def from_basis_points(cls, bp: int) -> "Percent":
        """Build from hundredths of a percent (e.g. 9795 -> 97.95%)."""
        return cls(bp, 10_000)

    def as_fraction(self) -> Fraction:
        return Fraction(self.numerator, self.denominator)

    def pct_fraction(self) -> Fraction:
        """The value scaled to percent, still exact."""
        return Fraction(100 * self.numerator, self.denominator)


@dataclass(frozen=True)
class Rule:
    """An antecedent => consequent implication with its exact counts.

    Confidence, coverage and support all derive from the three stored counts,
    so a rule can be re-rendered or re-thresholded without touching the
    database it came from.
    """

    antecedent: tuple[int, ...]
    consequent: tuple[int, ...]
    antecedent_count: int
    joint_count: int
    db_size: int

    def __post_init__(self) -> None:
        for side in (self.antecedent, self.consequent):
            if any(a >= b for a, b in zip(side, side[1:])) or any(i < 0 for i in side):
                raise ValueError("rule sides must be strictly increasing item id tuples")
        if not self.consequent:
            raise ValueError("rule consequent must be non-empty")
        if set(self.antecedent) & set(self.consequent):
            raise ValueError("antecedent and consequent must be disjoint")
        if not 0 <= self.joint_count <= self.antecedent_count <= self.db_size:
            raise ValueError(
                f"counts must satisfy 0 <= joint <= antecedent <= size, got "
                f"{self.joint_count}/{self.antecedent_count}/{self.db_size}"
            )
        if self.antecedent_count == 0:
            raise ValueError("rules require a non-empty antecedent cover")

    @property
    def confidence(self) -> Percent:
        return Percent(self.joint_count, self.antecedent_count)

    @property
    def coverage(self) -> Percent:
        """Antecedent share of the database (the reference files' support column)."""
        return Percent(self.antecedent_count, self.db_size)

    @property
    def support(self) -> Percent:
        """Joint share of the database."""
        return Percent(self.joint_count, self.db_size)


class RuleClass(enum.IntEnum):
    """Priority tier of a rule; ordered so stronger confidence compares higher."""

    REJECTED = 0
    SHOULD_HAVE = 1
    MUST_HAVE = 2

    @property
    def label(self) -> str:
        return self.name.lower()


@dataclass(frozen=True)
class MiningConfig:
    """Template and thresholds for rule derivation.

    The defaults reproduce the study setting: demographic antecedents of at
    most two items, single facility consequents, confidence at least 90%, and
    no support floor beyond requiring the joint itemset to occur at all.
    """

    min_confidence: Percent = Percent(90, 100)
    min_coverage_count: int = 1
    max_antecedent_size: int = 2
    antecedent_class: ItemClass = ItemClass.DEMOGRAPHIC
    consequent_class: ItemClass = ItemClass.FACILITY
    consequent_size: int = 1

    def __post_init__(self) -> None:
        if self.min_coverage_count < 1:
            raise ValueError("min_coverage_count must be at least 1")
        if self.max_antecedent_size < 1:
            raise ValueError("max_antecedent_size must be at least 1")
        if self.consequent_size < 1:
            raise ValueError("consequent_size must be at least 1")
        if self.antecedent_class is self.consequent_class:
            raise ValueError("antecedent and consequent classes must differ")
