"""Level-wise frequent-itemset mining over vertical bit vectors.

Raw transactions are touched once, when the database's vertical index is
built; all counting afterwards is word-level intersection plus popcount on
per-item transaction bitsets. A candidate at level k+1 is counted by
intersecting the cached bitset of its size-k prefix with one item vector.

Counting work may be partitioned across worker threads; partial results are
merged back in candidate order, so output is identical for any worker count.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, Iterable, Optional, Sequence

from .datamodel import TransactionDatabase, build_vertical_index

__all__ = [
    "CountedItemset",
    "FrequentLevel",
    "build_vertical_index",
    "count_support",
    "generate_candidates",
    "mine_frequent",
]


@dataclass(frozen=True)
class CountedItemset:
    items: tuple[int, ...]
    count: int


@dataclass(frozen=True)
class FrequentLevel:
    """All frequent itemsets of one size, sorted lexicographically by item ids."""

    k: int
    itemsets: tuple[CountedItemset, ...]

    def __iter__(self):
        return iter(self.itemsets)


def count_support(db: TransactionDatabase, items: Iterable[int]) -> int:
    """Number of transactions containing every item of ``items``.

    The empty itemset is contained in every transaction, so its count is the
    database size.
    """
    ids = tuple(items)
    n = db.catalog.n_items
    for i in ids:
        if not 0 <= i < n:
            raise ValueError(f"item id {i} outside catalog of size {n}")
    if not ids:
        return db.size
    vec = db.vertical_index[ids[0]]
    for i in ids[1:]:
        vec &= db.vertical_index[i]
    return vec.bit_count()


def generate_candidates(level: FrequentLevel) -> list[tuple[int, ...]]:
    """Join frequent k-itemsets sharing their first k-1 items, then prune.

    A join result survives only if every size-k subset is itself frequent.
    Input must be sorted lexicographically; output is sorted and duplicate
    free by construction.
    """
    sets = [ci.items for ci in level.itemsets]
    frequent = set(sets)
    out: list[tuple[int, ...]] = []
    for i, left in enumerate(sets):
        prefix = left[:-1]
        for j in range(i + 1, len(sets)):
            right = sets[j]
            if right[:-1] != prefix:
                break
            cand = left + (right[-1],)
            # left and right are the two drop-one subsets keeping the shared
            # prefix; the remaining ones drop an item inside the prefix.
            if all(cand[:p] + cand[p + 1:] in frequent for p in range(len(cand) - 2)):
                out.append(cand)
    return out


def _count_block(
    cands: Sequence[tuple[int, ...]],
    parent_vectors: dict,
    item_vectors: Sequence[int],
    min_count: int,
) -> list[tuple[tuple[int, ...], int, int]]:
    kept = []
    for cand in cands:
        vec = parent_vectors[cand[:-1]] & item_vectors[cand[-1]]
        count = vec.bit_count()
        if count >= min_count:
            kept.append((cand, count, vec))
    return kept


def mine_frequent(
    db: TransactionDatabase,
    min_count: int,
    item_filter: Optional[Callable[[int], bool]] = None,
    max_size: Optional[int] = None,
    workers: int = 1,
) -> list[FrequentLevel]:
    """All frequent itemsets, level by level, up to ``max_size`` if given.

    Level 1 holds every item passing ``item_filter`` whose vector popcount
    reaches ``min_count``; each further level is generated by join+prune and
    counted against the previous level's cached vectors. Returns only the
    non-empty levels. Output is deterministic regardless of transaction
    order or ``workers``.
    """
    if db.size == 0:
        raise ValueError("cannot mine an empty database")
    if min_count < 1:
        raise ValueError("min_count must be at least 1")
    index = db.vertical_index
    ids = range(db.catalog.n_items)
    if item_filter is not None:
        ids = [i for i in ids if item_filter(i)]

    singles = [
        CountedItemset((i,), index[i].bit_count())
        for i in ids
        if index[i].bit_count() >= min_count
    ]
    levels: list[FrequentLevel] = []
    current = FrequentLevel(1, tuple(singles))
    vectors = {ci.items: index[ci.items[0]] for ci in singles}

    while current.itemsets:
        levels.append(current)
        if max_size is not None and current.k >= max_size:
            break
        cands = generate_candidates(current)
        if workers > 1 and len(cands) > 1:
            step = (len(cands) + workers - 1) // workers
            blocks = [cands[p:p + step] for p in range(0, len(cands), step)]
            with ThreadPoolExecutor(max_workers=workers) as pool:
                results = pool.map(
                    lambda b: _count_block(b, vectors, index, min_count), blocks
                )
                kept = [entry for block in results for entry in block]
        else:
            kept = _count_block(cands, vectors, index, min_count)
        vectors = {items: vec for items, _, vec in kept}
        current = FrequentLevel(
            current.k + 1, tuple(CountedItemset(items, count) for items, count, _ in kept)
        )
    return levels
