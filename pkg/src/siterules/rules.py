"""Template-constrained rule derivation and canonical ordering.

Rules are read off the frequent itemsets: any frequent itemset holding
exactly one consequent-class item y, whose remainder A is all
antecedent-class and within the size cap, yields the candidate rule A => y.
The rule's counts are exact, taken from the mined itemset counts, so every
metric derives from integers.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

from .datamodel import MiningConfig, Percent, Rule, TransactionDatabase
from .engine import mine_frequent


@dataclass(frozen=True)
class RuleSet:
    rules: tuple[Rule, ...]
    config: MiningConfig
    db_size: int

    def __len__(self) -> int:
        return len(self.rules)

    def __iter__(self):
        return iter(self.rules)


class RuleMetrics(NamedTuple):
    confidence: Percent
    coverage: Percent
    support: Percent


def rule_metrics(rule: Rule) -> RuleMetrics:
    """Exact confidence, coverage and support of a rule.

    Coverage is the antecedent share of the database; support the joint
    share. Coverage is the quantity the reference files publish in their
    support column.
    """
    return RuleMetrics(rule.confidence, rule.coverage, rule.support)


def derive_rules(
    db: TransactionDatabase,
    config: MiningConfig = MiningConfig(),
    workers: int = 1,
) -> RuleSet:
    """Mine all rules matching the configured template and thresholds.

    Frequent itemsets are mined over the union of antecedent- and
    consequent-class items with the configured coverage count as the
    frequency floor, so a rule is emitted iff its joint itemset occurs at
    least ``min_coverage_count`` times and its confidence reaches
    ``min_confidence``.
    """
    if db.size == 0:
        raise ValueError("cannot derive rules from an empty database")
    if config.consequent_size != 1:
        raise ValueError("only single-item consequents are supported")
    catalog = db.catalog
    antecedent_ids = set(catalog.ids_of_class(config.antecedent_class))
    consequent_ids = set(catalog.ids_of_class(config.consequent_class))
    if not antecedent_ids:
        raise ValueError(f"catalog has no {config.antecedent_class.value} items")
    if not consequent_ids:
        raise ValueError(f"catalog has no {config.consequent_class.value} items")

    allowed = antecedent_ids | consequent_ids
    levels = mine_frequent(
        db,
        config.min_coverage_count,
        item_filter=allowed.__contains__,
        max_size=config.max_antecedent_size + 1,
        workers=workers,
    )
    counts = {ci.items: ci.count for level in levels for ci in level}

    rules: list[Rule] = []
    for level in levels[1:]:
        for ci in level:
            tail = [i for i in ci.items if i in consequent_ids]
            if len(tail) != 1:
                continue
            antecedent = tuple(i for i in ci.items if i != tail[0])
            if len(antecedent) > config.max_antecedent_size:
                continue
            n_antecedent = counts[antecedent]
            if Percent(ci.count, n_antecedent) < config.min_confidence:
                continue
            rules.append(Rule(antecedent, (tail[0],), n_antecedent, ci.count, db.size))
    return RuleSet(tuple(rules), config, db.size)


def canonical_sort(ruleset: RuleSet) -> RuleSet:
    """Order rules by confidence (descending, exact), then antecedent size,
    then antecedent item ids, then consequent item ids. Total and stable."""
    ordered = sorted(
        ruleset.rules,
        key=lambda r: (
            -r.confidence.as_fraction(),
            len(r.antecedent),
            r.antecedent,
            r.consequent,
        ),
    )
    return RuleSet(tuple(ordered), ruleset.config, ruleset.db_size)
