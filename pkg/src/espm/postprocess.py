"""Stringent second pass over mined candidates.

Survivors must pass, per target label and in this order: the first novelty
condition (computed while mining), a Bonferroni-corrected p-value threshold
that depends on the pattern length, the second novelty condition against
frequent and relevant sub-patterns, and an optional posterior floor.
"""
from __future__ import annotations

import time
from dataclasses import dataclass, field, replace
from itertools import combinations
from typing import Mapping, Optional, Sequence

from .dataset import ItemCatalog
from .miner import CandidateRecord, MineResult, MiningConfig
from .stats import binomial_tail

STAGES = ("novelty1", "bonferroni", "novelty2", "posterior_floor")


@dataclass(frozen=True)
class MinedPattern:
    pattern: tuple[int, ...]
    supports: tuple[int, ...]
    p_value: float
    target: int
    posterior: float


@dataclass
class InformativePatternSet:
    patterns: list[MinedPattern]
    # sorted item ids occurring in at least one surviving pattern
    attribute_values: tuple[int, ...]
    thresholds: tuple[float, ...]
    # target label name -> stage name -> number of candidates removed there
    provenance: dict[str, dict[str, int]]
    config: MiningConfig
    timing: dict = field(default_factory=dict)

    def survivors(self, target: Optional[int] = None) -> list[tuple[int, ...]]:
        return [m.pattern for m in self.patterns if target is None or m.target == target]


def bonferroni_thresholds(test_count: Sequence[int], theta_p0: float, max_length: Optional[int] = None) -> tuple[float, ...]:
    """Length-indexed p-value thresholds; element ``l - 1`` is for length ``l``.

    Each level divides ``theta_p0`` by ``2**l`` times the number of tests run
    at that length and never exceeds the previous level. Lengths without any
    test inherit the previous threshold.
    """
    if max_length is None:
        max_length = len(test_count)
    out = []
    prev = theta_p0
    for length in range(1, max_length + 1):
        n = test_count[length - 1] if length <= len(test_count) else 0
        if n > 0:
            prev = min(theta_p0 / (2**length * n), prev)
        out.append(prev)
    return tuple(out)


def novel_vs_subpatterns(
    record: CandidateRecord,
    candidate_index: Mapping[tuple[int, ...], CandidateRecord],
    target: int,
    alpha: float,
    item_posteriors: Mapping[int, Sequence[float]],
    singleton_novelty: str = "skip",
) -> bool:
    """Second novelty condition.

    The reference probability is the best posterior of ``target`` among the
    proper sub-patterns found in ``candidate_index``. Without any such
    sub-pattern the item-level reference of the first condition is used.
    """
    pattern = record.pattern
    best = None
    for size in range(1, len(pattern)):
        for sub in combinations(pattern, size):
            rec = candidate_index.get(sub)
            if rec is not None:
                p = rec.posteriors[target]
                if best is None or p > best:
                    best = p
    if best is None:
        if len(pattern) == 1 and singleton_novelty == "skip":
            return True
        best = max(item_posteriors[a][target] for a in pattern)
    return binomial_tail(record.coverage, record.supports[target], best) < alpha


def _sort_key(rank: Mapping[int, int]):
    return lambda m: (m.target, len(m.pattern), tuple(rank[a] for a in m.pattern))


def finalize(mine_result: MineResult, config: Optional[MiningConfig] = None) -> InformativePatternSet:
    """Apply the post-processing gates to every candidate, per target label."""
    t0 = time.perf_counter()
    cfg = config or mine_result.config
    thresholds = bonferroni_thresholds(mine_result.test_count, cfg.theta_p0, cfg.max_length)
    index = mine_result.candidate_index()
    survivors: list[MinedPattern] = []
    provenance: dict[str, dict[str, int]] = {}
    for ti, c in enumerate(mine_result.targets):
        name = mine_result.label_names[c]
        floor = cfg.posterior_floor(name)
        removed = dict.fromkeys(STAGES, 0)
        for rec in mine_result.candidates:
            if not rec.novelty1[ti]:
                removed["novelty1"] += 1
            elif not rec.p_value < thresholds[len(rec.pattern) - 1]:
                removed["bonferroni"] += 1
            elif not novel_vs_subpatterns(
                rec, index, c, cfg.alpha, mine_result.item_posteriors, cfg.singleton_novelty
            ):
                removed["novelty2"] += 1
            elif floor is not None and not rec.posteriors[c] > floor:
                removed["posterior_floor"] += 1
            else:
                survivors.append(
                    MinedPattern(rec.pattern, rec.supports, rec.p_value, c, rec.posteriors[c])
                )
        provenance[name] = {
            "candidates": len(mine_result.candidates),
            **removed,
            "survivors": len(mine_result.candidates) - sum(removed.values()),
        }
    rank = {a: r for r, a in enumerate(mine_result.item_order)}
    survivors.sort(key=_sort_key(rank))
    items = sorted({a for m in survivors for a in m.pattern})
    return InformativePatternSet(
        patterns=survivors,
        attribute_values=tuple(items),
        thresholds=thresholds,
        provenance=provenance,
        config=cfg,
        timing={"postprocess_seconds": time.perf_counter() - t0},
    )


def restrict(mine_result: MineResult, pattern_set: InformativePatternSet) -> MineResult:
    """Mining result reduced to the candidates that survived ``pattern_set``."""
    keep = {m.pattern for m in pattern_set.patterns}
    return replace(mine_result, candidates=[r for r in mine_result.candidates if r.pattern in keep])


def extract_attribute_values(pattern_set: InformativePatternSet, catalog: ItemCatalog) -> list[tuple[str, str]]:
    """Decoded (attribute, value) pairs of the enhanced representation."""
    return sorted({catalog.decode(a) for m in pattern_set.patterns for a in m.pattern})
