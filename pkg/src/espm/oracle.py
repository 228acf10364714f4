"""Brute-force reference miner.

Enumerates every combination of frequent items up to the length limit and
counts supports with per-item sample bitsets. All gates are reimplemented
here from their definitions; only the statistical kernels and the result
containers are shared with the FP-Tree pipeline, so structural bugs in the
tree or the search cannot cancel out.
"""
from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations
from typing import Optional

from .dataset import Dataset
from .errors import OracleCapExceeded
from .miner import CandidateRecord, MineResult, MiningConfig
from .postprocess import InformativePatternSet, MinedPattern
from .stats import (
    ContingencyTable,
    binomial_tail,
    chi_square_sf,
    fisher_exact_2x2,
    g2_statistic,
)

DEFAULT_ITEM_CAP = 16
MAX_LENGTH_CAP = 5


@dataclass
class OracleResult:
    pattern_set: InformativePatternSet
    candidates: list[CandidateRecord]
    test_count: tuple[int, ...]
    item_order: tuple[int, ...]


class _Counter:
    def __init__(self, dataset: Dataset):
        n = len(dataset)
        k = len(dataset.label_names)
        self.k = k
        self.label_mask = [0] * k
        for i, c in enumerate(dataset.labels):
            self.label_mask[c] |= 1 << i
        self.cover: dict[int, int] = {}
        for i, t in enumerate(dataset.transactions):
            for a in t:
                self.cover[a] = self.cover.get(a, 0) | (1 << i)
        self.all = (1 << n) - 1
        self.groups = dataset.groups

    def label_counts(self):
        return tuple(self.supports_of_mask(self.all))

    def supports_of_mask(self, mask: int) -> list[int]:
        if self.groups is None:
            return [(mask & m).bit_count() for m in self.label_mask]
        out = []
        for m in self.label_mask:
            sel = mask & m
            seen = set()
            i = 0
            while sel:
                if sel & 1:
                    seen.add(self.groups[i])
                sel >>= 1
                i += 1
            out.append(len(seen))
        return out

    def supports(self, pattern) -> tuple[int, ...]:
        mask = self.all
        for a in pattern:
            mask &= self.cover.get(a, 0)
        return tuple(self.supports_of_mask(mask))


def _is_frequent(sup, counts, lam, targets) -> bool:
    for c in targets:
        if lam >= 1:
            if sup[c] >= lam:
                return True
        elif counts[c] > 0 and sup[c] / counts[c] >= lam:
            return True
    return False


def _p_value(sup, counts, cfg: MiningConfig, targets) -> float:
    if len([t for t in counts if t > 0]) < 2:
        return 1.0
    n = sum(counts)
    n_cov = sum(sup)
    if cfg.relevance_backend == "fisher":
        return min(
            fisher_exact_2x2(
                sup[c], n_cov - sup[c], counts[c] - sup[c], n - n_cov - (counts[c] - sup[c])
            )
            for c in targets
        )
    if cfg.g2_table == "one-vs-rest" and len(counts) > 2:
        best = 1.0
        for c in targets:
            if 0 < counts[c] < n:
                table = ContingencyTable((sup[c], n_cov - sup[c]), (counts[c], n - counts[c]))
                g = g2_statistic(table)
                best = min(best, chi_square_sf(g.statistic, g.df))
        return best
    g = g2_statistic(ContingencyTable(tuple(sup), tuple(counts)))
    return chi_square_sf(g.statistic, g.df)


def _tail_below(n_cov, n_c, prob, alpha) -> bool:
    return binomial_tail(n_cov, n_c, prob) < alpha


def brute_force_mine(
    dataset: Dataset,
    config: MiningConfig,
    item_cap: int = DEFAULT_ITEM_CAP,
) -> OracleResult:
    """Mine and post-process by exhaustive enumeration."""
    if config.max_length > MAX_LENGTH_CAP:
        raise OracleCapExceeded(
            f"oracle supports max_length <= {MAX_LENGTH_CAP}, got {config.max_length}"
        )
    names = dataset.label_names
    targets = config.target_ids(names)
    counter = _Counter(dataset)
    counts = counter.label_counts()
    lam = config.min_support

    item_sup = {a: counter.supports((a,)) for a in counter.cover}
    freq_items = [a for a, s in item_sup.items() if _is_frequent(s, counts, lam, targets)]
    if len(freq_items) > item_cap:
        raise OracleCapExceeded(
            f"oracle limited to {item_cap} frequent items, dataset has {len(freq_items)}"
        )
    order = sorted(freq_items, key=lambda a: (-sum(item_sup[a]), a))
    item_post = {a: tuple(s / sum(item_sup[a]) for s in item_sup[a]) for a in order}

    test_count = [0] * config.max_length
    candidates: list[CandidateRecord] = []
    for length in range(1, config.max_length + 1):
        for pattern in combinations(order, length):
            sup = counter.supports(pattern)
            if not _is_frequent(sup, counts, lam, targets):
                continue
            p = _p_value(sup, counts, config, targets)
            passed = p < config.relevance_p
            if passed or config.testcount_mode == "prose":
                test_count[length - 1] += 1
            if not passed:
                continue
            n_cov = sum(sup)
            post = tuple(s / n_cov for s in sup)
            nov = []
            for c in targets:
                if length == 1 and config.singleton_novelty == "skip":
                    nov.append(True)
                else:
                    ref = max(item_post[a][c] for a in pattern)
                    nov.append(_tail_below(n_cov, sup[c], ref, config.alpha))
            candidates.append(CandidateRecord(pattern, sup, p, tuple(nov), post))

    # Bonferroni schedule
    thresholds = []
    prev = config.theta_p0
    for length in range(1, config.max_length + 1):
        tc = test_count[length - 1]
        if tc:
            prev = min(prev, config.theta_p0 / (2**length * tc))
        thresholds.append(prev)

    pool = {r.pattern: r for r in candidates}
    survivors = []
    provenance = {}
    for ti, c in enumerate(targets):
        floor = config.posterior_floor(names[c])
        removed = {"novelty1": 0, "bonferroni": 0, "novelty2": 0, "posterior_floor": 0}
        for r in candidates:
            length = len(r.pattern)
            if not r.novelty1[ti]:
                removed["novelty1"] += 1
                continue
            if not r.p_value < thresholds[length - 1]:
                removed["bonferroni"] += 1
                continue
            subs = [
                pool[s].posteriors[c]
                for size in range(1, length)
                for s in combinations(r.pattern, size)
                if s in pool
            ]
            if subs:
                ok = _tail_below(r.coverage, r.supports[c], max(subs), config.alpha)
            elif length == 1 and config.singleton_novelty == "skip":
                ok = True
            else:
                ref = max(item_post[a][c] for a in r.pattern)
                ok = _tail_below(r.coverage, r.supports[c], ref, config.alpha)
            if not ok:
                removed["novelty2"] += 1
                continue
            if floor is not None and not r.posteriors[c] > floor:
                removed["posterior_floor"] += 1
                continue
            survivors.append(MinedPattern(r.pattern, r.supports, r.p_value, c, r.posteriors[c]))
        provenance[names[c]] = {
            "candidates": len(candidates),
            **removed,
            "survivors": len(candidates) - sum(removed.values()),
        }
    rank = {a: i for i, a in enumerate(order)}
    survivors.sort(key=lambda m: (m.target, len(m.pattern), tuple(rank[a] for a in m.pattern)))
    pattern_set = InformativePatternSet(
        patterns=survivors,
        attribute_values=tuple(sorted({a for m in survivors for a in m.pattern})),
        thresholds=tuple(thresholds),
        provenance=provenance,
        config=config,
    )
    return OracleResult(pattern_set, candidates, tuple(test_count), tuple(order))


def diff_results(
    mine_result: MineResult,
    pattern_set: InformativePatternSet,
    oracle: OracleResult,
    p_tol: float = 1e-9,
) -> list[str]:
    """Field-level differences between the pipeline and the oracle; empty if equal."""
    diffs: list[str] = []
    if tuple(mine_result.item_order) != oracle.item_order:
        diffs.append(f"item_order: pipeline={mine_result.item_order} oracle={oracle.item_order}")
    if tuple(mine_result.test_count) != oracle.test_count:
        diffs.append(f"test_count: pipeline={mine_result.test_count} oracle={oracle.test_count}")

    ours = mine_result.candidate_index()
    theirs = {r.pattern: r for r in oracle.candidates}
    for pat in sorted(set(ours) - set(theirs)):
        diffs.append(f"candidate {pat}: only in pipeline")
    for pat in sorted(set(theirs) - set(ours)):
        diffs.append(f"candidate {pat}: only in oracle")
    for pat in sorted(set(ours) & set(theirs)):
        diffs.extend(_record_diff(f"candidate {pat}", ours[pat], theirs[pat], p_tol))

    a, b = pattern_set, oracle.pattern_set
    if a.thresholds != b.thresholds:
        diffs.append(f"thresholds: pipeline={a.thresholds} oracle={b.thresholds}")
    left = [(m.target, m.pattern) for m in a.patterns]
    right = [(m.target, m.pattern) for m in b.patterns]
    if left != right:
        only_a = sorted(set(left) - set(right))
        only_b = sorted(set(right) - set(left))
        diffs.append(f"survivors: only in pipeline={only_a} only in oracle={only_b}")
    else:
        for x, y in zip(a.patterns, b.patterns):
            if x.supports != y.supports:
                diffs.append(f"survivor {x.pattern}: supports {x.supports} != {y.supports}")
            if abs(x.p_value - y.p_value) > p_tol:
                diffs.append(f"survivor {x.pattern}: p-value {x.p_value!r} != {y.p_value!r}")
            if abs(x.posterior - y.posterior) > 1e-12:
                diffs.append(f"survivor {x.pattern}: posterior {x.posterior!r} != {y.posterior!r}")
    if a.attribute_values != b.attribute_values:
        diffs.append(f"attribute_values: pipeline={a.attribute_values} oracle={b.attribute_values}")
    if a.provenance != b.provenance:
        diffs.append(f"provenance: pipeline={a.provenance} oracle={b.provenance}")
    return diffs


def _record_diff(where: str, x: CandidateRecord, y: CandidateRecord, p_tol: float) -> list[str]:
    out = []
    if x.supports != y.supports:
        out.append(f"{where}: supports {x.supports} != {y.supports}")
    if abs(x.p_value - y.p_value) > p_tol:
        out.append(f"{where}: p-value {x.p_value!r} != {y.p_value!r}")
    if x.novelty1 != y.novelty1:
        out.append(f"{where}: novelty1 {x.novelty1} != {y.novelty1}")
    if any(abs(u - v) > 1e-12 for u, v in zip(x.posteriors, y.posteriors)):
        out.append(f"{where}: posteriors {x.posteriors} != {y.posteriors}")
    return out


def verify(dataset: Dataset, config: MiningConfig, item_cap: int = DEFAULT_ITEM_CAP, perturb=None) -> list[str]:
    """Run pipeline and oracle on ``dataset``; return the list of differences.

    ``perturb`` (testing hook) may rewrite the pipeline's MineResult before
    post-processing.
    """
    from .miner import mine
    from .postprocess import finalize

    oracle = brute_force_mine(dataset, config, item_cap=item_cap)
    result = mine(dataset, config)
    if perturb is not None:
        result = perturb(result)
    return diff_results(result, finalize(result), oracle)


__all__ = ["OracleResult", "brute_force_mine", "diff_results", "verify"]
