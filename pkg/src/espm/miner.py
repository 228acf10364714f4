"""Recursive conditional-tree search for frequent, relevant patterns.

The search grows a pattern by prepending items that precede its first item
in the global order, so every conjunction is visited at most once. Each
visited pattern that passes the frequency gate gets a relevance test; the
relevant ones are kept as candidates together with their first novelty
verdicts, which the post-processing step needs later.
"""
from __future__ import annotations

import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Mapping, Optional, Sequence, Union

from .dataset import Dataset, label_counts
from .errors import ConfigError
from .fptree import FPTree, build_fp_tree, collect_frequent_items, conditional_tree
from .stats import (
    ContingencyTable,
    binomial_tail,
    chi_square_sf,
    fisher_exact_2x2,
    g2_statistic,
)

RELEVANCE_BACKENDS = ("g2", "fisher")
G2_TABLES = ("full", "one-vs-rest")
TESTCOUNT_MODES = ("prose", "pseudocode")
SINGLETON_NOVELTY = ("skip", "strict")


@dataclass(frozen=True)
class MiningConfig:
    """Thresholds and switches for one mining run.

    ``min_support`` below 1 is a per-label relative support, at 1 or above
    an absolute count. ``targets`` names the labels patterns are mined for
    (all labels when ``None``). ``min_posterior`` is either one floor for
    every target or a mapping from label name to floor.
    """

    min_support: float
    max_length: int
    alpha: float = 0.01
    relevance_p: float = 0.01
    theta_p0: float = 0.05
    targets: Optional[tuple[str, ...]] = None
    min_posterior: Union[None, float, Mapping[str, float]] = None
    relevance_backend: str = "g2"
    g2_table: str = "full"
    testcount_mode: str = "prose"
    singleton_novelty: str = "skip"

    def __post_init__(self):
        if not self.min_support > 0:
            raise ConfigError(f"min_support must be > 0, got {self.min_support}")
        if self.max_length < 1:
            raise ConfigError(f"max_length must be >= 1, got {self.max_length}")
        if not 0 < self.alpha < 1:
            raise ConfigError(f"alpha must lie in (0, 1), got {self.alpha}")
        if not 0 < self.relevance_p <= 1:
            raise ConfigError(f"relevance_p must lie in (0, 1], got {self.relevance_p}")
        if not 0 < self.theta_p0 <= 1:
            raise ConfigError(f"theta_p0 must lie in (0, 1], got {self.theta_p0}")
        for name, value, allowed in (
            ("relevance_backend", self.relevance_backend, RELEVANCE_BACKENDS),
            ("g2_table", self.g2_table, G2_TABLES),
            ("testcount_mode", self.testcount_mode, TESTCOUNT_MODES),
            ("singleton_novelty", self.singleton_novelty, SINGLETON_NOVELTY),
        ):
            if value not in allowed:
                raise ConfigError(f"{name} must be one of {allowed}, got {value!r}")
        if self.targets is not None:
            object.__setattr__(self, "targets", tuple(self.targets))
            if not self.targets:
                raise ConfigError("targets must not be empty")
        floors = self.min_posterior
        if isinstance(floors, Mapping):
            values = list(floors.values())
        elif floors is None:
            values = []
        else:
            values = [floors]
        for v in values:
            if not 0 <= v < 1:
                raise ConfigError(f"posterior floor must lie in [0, 1), got {v}")

    @property
    def absolute_support(self) -> bool:
        return self.min_support >= 1

    def target_ids(self, label_names: Sequence[str]) -> tuple[int, ...]:
        if self.targets is None:
            return tuple(range(len(label_names)))
        ids = []
        for t in self.targets:
            if t not in label_names:
                raise ConfigError(f"unknown target label {t!r}; labels are {list(label_names)}")
            ids.append(label_names.index(t))
        return tuple(sorted(set(ids)))

    def posterior_floor(self, label: str) -> Optional[float]:
        if isinstance(self.min_posterior, Mapping):
            return self.min_posterior.get(label)
        return self.min_posterior

    def to_dict(self) -> dict:
        floors = self.min_posterior
        if isinstance(floors, Mapping):
            floors = dict(sorted(floors.items()))
        return {
            "min_support": self.min_support,
            "max_length": self.max_length,
            "alpha": self.alpha,
            "relevance_p": self.relevance_p,
            "theta_p0": self.theta_p0,
            "targets": list(self.targets) if self.targets is not None else None,
            "min_posterior": floors,
            "relevance_backend": self.relevance_backend,
            "g2_table": self.g2_table,
            "testcount_mode": self.testcount_mode,
            "singleton_novelty": self.singleton_novelty,
        }


@dataclass(frozen=True)
class CandidateRecord:
    pattern: tuple[int, ...]
    supports: tuple[int, ...]
    p_value: float
    # aligned with MineResult.targets
    novelty1: tuple[bool, ...]
    posteriors: tuple[float, ...]

    @property
    def coverage(self) -> int:
        return sum(self.supports)


@dataclass
class MineResult:
    candidates: list[CandidateRecord]
    # test_count[l - 1] is the number of G^2 tests on patterns of length l
    test_count: tuple[int, ...]
    item_posteriors: dict[int, tuple[float, ...]]
    item_order: tuple[int, ...]
    label_counts: tuple[int, ...]
    targets: tuple[int, ...]
    label_names: tuple[str, ...]
    config: MiningConfig
    timing: dict = field(default_factory=dict)

    def candidate_index(self) -> dict[tuple[int, ...], CandidateRecord]:
        return {rec.pattern: rec for rec in self.candidates}


# -- gates ------------------------------------------------------------------


def frequent(
    supports: Sequence[int],
    label_counts: Sequence[int],
    config: MiningConfig,
    targets: Optional[Sequence[int]] = None,
) -> bool:
    """Frequency gate: some target label reaches the support threshold."""
    if targets is None:
        targets = range(len(supports))
    lam = config.min_support
    if lam >= 1:
        return any(supports[c] >= lam for c in targets)
    return any(
        label_counts[c] > 0 and supports[c] / label_counts[c] >= lam for c in targets
    )


def relevance_p_value(
    supports: Sequence[int],
    label_counts: Sequence[int],
    config: MiningConfig,
    targets: Optional[Sequence[int]] = None,
) -> float:
    """p-value of the association between pattern coverage and the label.

    Returns 1.0 when fewer than two labels are present, as no association
    can be measured.
    """
    if targets is None:
        targets = range(len(supports))
    if sum(1 for t in label_counts if t > 0) < 2:
        return 1.0
    table = ContingencyTable.from_supports(supports, label_counts)
    if config.relevance_backend == "fisher":
        n_cov = sum(table.covered)
        n = table.grand_total
        best = 1.0
        for c in targets:
            a = table.covered[c]
            b = n_cov - a
            cc = table.totals[c] - a
            d = n - n_cov - cc
            best = min(best, fisher_exact_2x2(a, b, cc, d))
        return best
    if config.g2_table == "one-vs-rest" and len(label_counts) > 2:
        best = 1.0
        for c in targets:
            sub = table.collapse(c)
            if 0 < sub.totals[0] < sub.grand_total:
                g = g2_statistic(sub)
                best = min(best, chi_square_sf(g.statistic, g.df))
        return best
    g = g2_statistic(table)
    return chi_square_sf(g.statistic, g.df)


def relevant(
    pattern: Sequence[int],
    supports: Sequence[int],
    label_counts: Sequence[int],
    config: MiningConfig,
    targets: Optional[Sequence[int]] = None,
) -> tuple[bool, float]:
    """Lenient relevance gate used during mining."""
    p = relevance_p_value(supports, label_counts, config, targets)
    return p < config.relevance_p, p


def posteriors(supports: Sequence[int]) -> tuple[float, ...]:
    n = sum(supports)
    if n == 0:
        raise ValueError("posterior undefined for a pattern with empty cover")
    return tuple(s / n for s in supports)


def novel_vs_items(
    pattern: Sequence[int],
    supports: Sequence[int],
    item_posteriors: Mapping[int, Sequence[float]],
    target: int,
    alpha: float,
    singleton_novelty: str = "skip",
) -> bool:
    """First novelty condition: the pattern beats its best single item.

    With ``singleton_novelty="skip"`` a one-item pattern is vacuously novel.
    """
    if len(pattern) == 1 and singleton_novelty == "skip":
        return True
    n = sum(supports)
    best = max(item_posteriors[a][target] for a in pattern)
    return binomial_tail(n, supports[target], best) < alpha


# -- search -----------------------------------------------------------------


class _Search:
    def __init__(self, dataset: Dataset, config: MiningConfig):
        self.config = config
        self.label_names = dataset.label_names
        self.targets = config.target_ids(dataset.label_names)
        self.label_counts = tuple(label_counts(dataset)) if len(dataset) else (0,) * len(dataset.label_names)
        self.is_frequent = lambda sup: frequent(sup, self.label_counts, config, self.targets)
        t0 = time.perf_counter()
        self.frequent_items = collect_frequent_items(dataset, self.is_frequent) if len(dataset) else []
        self.tree, self.coitems = build_fp_tree(dataset, self.frequent_items)
        self.build_seconds = time.perf_counter() - t0
        self.item_posteriors = {f.item: posteriors(f.supports) for f in self.frequent_items}
        rank = self.tree.rank
        self.co_sorted = {a: sorted(s, key=rank.__getitem__) for a, s in self.coitems.items()}

    def run_top(self, index: int):
        """Search rooted at the ``index``-th frequent item."""
        out: list[CandidateRecord] = []
        counts = [0] * self.config.max_length
        a = self.tree.item_order[index]
        self._visit(self.tree, (), [a], out, counts)
        return out, counts

    def _visit(self, tree: FPTree, base: tuple[int, ...], items, out, counts):
        cfg = self.config
        for a in items:
            sup = tree.item_support(a)
            if not self.is_frequent(sup):
                continue
            q = (a,) + base
            ok, p = relevant(q, sup, self.label_counts, cfg, self.targets)
            if ok or cfg.testcount_mode == "prose":
                counts[len(q) - 1] += 1
            if ok:
                post = posteriors(sup)
                nov = tuple(
                    novel_vs_items(q, sup, self.item_posteriors, c, cfg.alpha, cfg.singleton_novelty)
                    for c in self.targets
                )
                out.append(CandidateRecord(q, sup, p, nov, post))
            if len(q) >= cfg.max_length:
                continue
            sub = conditional_tree(tree, a, keep=self.is_frequent)
            nxt = [b for b in self.co_sorted[a] if b in sub.header and b not in q]
            if nxt:
                self._visit(sub, q, nxt, out, counts)


_WORKER: Optional[_Search] = None


def _init_worker(dataset, config):
    global _WORKER
    _WORKER = _Search(dataset, config)


def _run_worker(index):
    return _WORKER.run_top(index)


def mine(dataset: Dataset, config: MiningConfig, threads: int = 1) -> MineResult:
    """Run the search over all frequent items.

    ``threads > 1`` fans the top-level items out to worker processes; each
    rebuilds the tree and the merged result is identical to the serial one.
    """
    if threads < 1:
        raise ConfigError("threads must be >= 1")
    t0 = time.perf_counter()
    search = _Search(dataset, config)
    n_top = len(search.tree.item_order)
    if threads == 1 or n_top < 2:
        parts = [search.run_top(i) for i in range(n_top)]
    else:
        with ProcessPoolExecutor(
            max_workers=threads, initializer=_init_worker, initargs=(dataset, config)
        ) as pool:
            parts = list(pool.map(_run_worker, range(n_top)))
    candidates: list[CandidateRecord] = []
    counts = [0] * config.max_length
    for cands, cnt in parts:
        candidates.extend(cands)
        counts = [x + y for x, y in zip(counts, cnt)]
    elapsed = time.perf_counter() - t0
    return MineResult(
        candidates=candidates,
        test_count=tuple(counts),
        item_posteriors=search.item_posteriors,
        item_order=search.tree.item_order,
        label_counts=search.label_counts,
        targets=search.targets,
        label_names=dataset.label_names,
        config=config,
        timing={
            "build_seconds": search.build_seconds,
            "mining_seconds": elapsed,
            "frequent_items": n_top,
            "tree_nodes": search.tree.node_count,
        },
    )
