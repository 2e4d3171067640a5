"""Priority tiering of rules by exact confidence.

Confidence of at least 95% makes a rule a must-have; at least 90% but below
95% a should-have; anything weaker is rejected. The 90-95 band is half-open
at the top so the two accepted tiers partition [90%, 100%] with no gap.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable

from .datamodel import Percent, Rule, RuleClass
from .rules import RuleSet

MUST_HAVE_FLOOR = Percent(95, 100)
SHOULD_HAVE_FLOOR = Percent(90, 100)


@dataclass(frozen=True)
class ClassifiedRule:
    rule: Rule
    rule_class: RuleClass


def classify_confidence(confidence: Percent) -> RuleClass:
    """Tier for an exact confidence value; boundaries compare as rationals."""
    if confidence >= MUST_HAVE_FLOOR:
        return RuleClass.MUST_HAVE
    if confidence >= SHOULD_HAVE_FLOOR:
        return RuleClass.SHOULD_HAVE
    return RuleClass.REJECTED


def classify_rule(rule: Rule) -> ClassifiedRule:
    return ClassifiedRule(rule, classify_confidence(rule.confidence))


def classify_rules(ruleset: RuleSet) -> tuple[ClassifiedRule, ...]:
    """Classify every rule, preserving the rule set's order."""
    return tuple(classify_rule(r) for r in ruleset)


def partition_rules(
    classified: Iterable[ClassifiedRule],
) -> tuple[list[ClassifiedRule], list[ClassifiedRule], list[ClassifiedRule]]:
    """Stable split into (must-have, should-have, rejected)."""
    must: list[ClassifiedRule] = []
    should: list[ClassifiedRule] = []
    rejected: list[ClassifiedRule] = []
    buckets = {
        RuleClass.MUST_HAVE: must,
        RuleClass.SHOULD_HAVE: should,
        RuleClass.REJECTED: rejected,
    }
    for entry in classified:
        buckets[entry.rule_class].append(entry)
    return must, should, rejected
