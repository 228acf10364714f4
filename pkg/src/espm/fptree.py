"""FP-Tree with per-label supports, header chains and the coItems index.

Supports are stored per node as one value per label. In plain mode the
value is a sample count. In group mode it is a bitmask over group indices,
so merging is a bitwise OR and the support is the number of set bits; this
counts distinct group keys exactly, also through conditional trees.
"""
from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass
from typing import Callable, Iterator, Optional, Sequence

from .dataset import Dataset


@dataclass(frozen=True)
class FrequentItem:
    item: int
    supports: tuple[int, ...]

    @property
    def total(self) -> int:
        return sum(self.supports)


class FPNode:
    __slots__ = ("item", "supports", "children", "parent")

    def __init__(self, item: Optional[int], parent: Optional["FPNode"], n_labels: int):
        self.item = item
        self.parent = parent
        self.supports = [0] * n_labels
        self.children: dict[int, FPNode] = {}

    def __repr__(self):
        return f"FPNode({self.item}, {self.supports})"


class FPTree:
    """Prefix tree over frequency-ordered transactions.

    ``item_order`` is shared with every conditional tree derived from this
    one; ``base_pattern`` is the conjunction the tree is conditioned on.
    """

    def __init__(
        self,
        item_order: Sequence[int],
        n_labels: int,
        grouped: bool = False,
        base_pattern: tuple[int, ...] = (),
        rank: Optional[dict[int, int]] = None,
    ):
        self.item_order = tuple(item_order)
        self.rank = rank if rank is not None else {a: r for r, a in enumerate(self.item_order)}
        self.n_labels = n_labels
        self.grouped = grouped
        self.base_pattern = base_pattern
        self.root = FPNode(None, None, 0)
        self.header: dict[int, list[FPNode]] = {}
        self._aggregate: dict[int, list[int]] = {}
        self.node_count = 0

    # -- construction ------------------------------------------------------

    def _insert(self, path: Sequence[int], raw: Sequence[int], coitems=None) -> None:
        node = self.root
        grouped = self.grouped
        n = self.n_labels
        for depth, item in enumerate(path):
            child = node.children.get(item)
            if child is None:
                child = FPNode(item, node, n)
                node.children[item] = child
                self.header.setdefault(item, []).append(child)
                self._aggregate.setdefault(item, [0] * n)
                self.node_count += 1
                if coitems is not None and depth:
                    coitems[item].update(path[:depth])
            sup = child.supports
            agg = self._aggregate[item]
            if grouped:
                for c in range(n):
                    if raw[c]:
                        sup[c] |= raw[c]
                        agg[c] |= raw[c]
            else:
                for c in range(n):
                    if raw[c]:
                        sup[c] += raw[c]
                        agg[c] += raw[c]
            node = child

    # -- queries -----------------------------------------------------------

    def _count(self, raw: Sequence[int]) -> tuple[int, ...]:
        if self.grouped:
            return tuple(v.bit_count() for v in raw)
        return tuple(raw)

    def item_support(self, item: int) -> tuple[int, ...]:
        """Per-label support of ``base_pattern + {item}`` in this tree."""
        raw = self._aggregate.get(item)
        if raw is None:
            return (0,) * self.n_labels
        return self._count(raw)

    def header_support(self, item: int) -> tuple[int, ...]:
        """Same as :meth:`item_support`, recomputed by walking the header chain."""
        acc = [0] * self.n_labels
        for node in self.header.get(item, ()):
            for c, v in enumerate(node.supports):
                if self.grouped:
                    acc[c] |= v
                else:
                    acc[c] += v
        return self._count(acc)

    def node_support(self, node: FPNode) -> tuple[int, ...]:
        return self._count(node.supports)

    def items(self) -> list[int]:
        """Items present in the tree, in global order."""
        return sorted(self.header, key=self.rank.__getitem__)

    def prefix_path(self, node: FPNode) -> list[int]:
        path = []
        p = node.parent
        while p is not None and p.item is not None:
            path.append(p.item)
            p = p.parent
        path.reverse()
        return path

    def nodes(self) -> Iterator[FPNode]:
        stack = list(self.root.children.values())
        while stack:
            node = stack.pop()
            yield node
            stack.extend(node.children.values())

    def paths(self) -> Iterator[tuple[tuple[int, ...], tuple[int, ...]]]:
        """Recover the inserted (path, per-label count) pairs.

        A path ends at a node with the node's supports minus its children's.
        Only meaningful for plain (non-grouped) trees.
        """
        if self.grouped:
            raise ValueError("path reconstruction needs plain counts")
        stack = [(child, (child.item,)) for child in self.root.children.values()]
        while stack:
            node, path = stack.pop()
            rest = list(node.supports)
            for child in node.children.values():
                for c, v in enumerate(child.supports):
                    rest[c] -= v
                stack.append((child, path + (child.item,)))
            if any(rest):
                yield path, tuple(rest)

    def dump(self, names: Optional[Callable[[int], str]] = None) -> str:
        """Deterministic indented rendering, one node per line."""
        names = names or str
        lines = [f"root base={[names(i) for i in self.base_pattern]}"]

        def walk(node, depth):
            for item in sorted(node.children, key=self.rank.__getitem__):
                child = node.children[item]
                sup = ",".join(str(v) for v in self.node_support(child))
                lines.append(f"{'  ' * depth}{names(item)} ({sup})")
                walk(child, depth + 1)

        walk(self.root, 1)
        return "\n".join(lines) + "\n"

    def __repr__(self):
        return f"FPTree(base={self.base_pattern}, nodes={self.node_count})"


# -- operations -------------------------------------------------------------


def _raw_item_supports(dataset: Dataset) -> dict[int, list]:
    """Per item, per label raw supports (counts or group bitmasks)."""
    k = len(dataset.label_names)
    out: dict[int, list] = defaultdict(lambda: [0] * k)
    if dataset.groups is None:
        for t, c in zip(dataset.transactions, dataset.labels):
            for a in t:
                out[a][c] += 1
    else:
        bits = _group_bits(dataset)
        for t, c, b in zip(dataset.transactions, dataset.labels, bits):
            for a in t:
                out[a][c] |= b
    return out


def _group_bits(dataset: Dataset) -> list[int]:
    index: dict[str, int] = {}
    bits = []
    for g in dataset.groups:
        i = index.setdefault(g, len(index))
        bits.append(1 << i)
    return bits


def collect_frequent_items(dataset: Dataset, is_frequent: Callable[[tuple[int, ...]], bool]) -> list[FrequentItem]:
    """Frequent singletons sorted by descending total support, then item id.

    ``is_frequent`` receives a per-label support tuple (see
    :func:`espm.miner.frequent`).
    """
    raw = _raw_item_supports(dataset)
    found = []
    for item, sup in raw.items():
        counts = tuple(v.bit_count() for v in sup) if dataset.grouped else tuple(sup)
        if is_frequent(counts):
            found.append(FrequentItem(item, counts))
    found.sort(key=lambda f: (-f.total, f.item))
    return found


def build_fp_tree(dataset: Dataset, frequent_items: Sequence[FrequentItem]) -> tuple[FPTree, dict[int, frozenset]]:
    """Insert every sample, filtered to frequent items, into a new tree.

    Returns the tree and the coItems index: for each item, the items found
    as its ancestors anywhere in the tree.
    """
    order = [f.item for f in frequent_items]
    k = len(dataset.label_names)
    tree = FPTree(order, k, grouped=dataset.grouped)
    rank = tree.rank
    coitems: dict[int, set] = {a: set() for a in order}

    # identical (path, label) rows are inserted once with a merged support
    merged: dict[tuple, int] = {}
    if dataset.grouped:
        bits = _group_bits(dataset)
        for t, c, b in zip(dataset.transactions, dataset.labels, bits):
            path = tuple(sorted((a for a in t if a in rank), key=rank.__getitem__))
            if path:
                merged[(path, c)] = merged.get((path, c), 0) | b
    else:
        for t, c in zip(dataset.transactions, dataset.labels):
            path = tuple(sorted((a for a in t if a in rank), key=rank.__getitem__))
            if path:
                merged[(path, c)] = merged.get((path, c), 0) + 1

    for (path, c), v in sorted(merged.items()):
        raw = [0] * k
        raw[c] = v
        tree._insert(path, raw, coitems)
    return tree, {a: frozenset(s) for a, s in coitems.items()}


def conditional_tree(
    tree: FPTree,
    item: int,
    keep: Optional[Callable[[tuple[int, ...]], bool]] = None,
) -> FPTree:
    """Tree of the prefix paths of ``item``, conditioned on ``base + {item}``.

    Each prefix path is inserted with the supports of the ``item`` node it
    leads to. Items whose support in the new tree is all zero are dropped;
    ``keep`` optionally drops further items (e.g. infrequent ones) given
    their per-label support in the new tree.
    """
    new = FPTree(
        tree.item_order,
        tree.n_labels,
        grouped=tree.grouped,
        base_pattern=tree.base_pattern + (item,),
        rank=tree.rank,
    )
    chain = tree.header.get(item)
    if not chain:
        return new
    entries = [(tree.prefix_path(node), node.supports) for node in chain]

    if keep is not None:
        n = tree.n_labels
        agg: dict[int, list[int]] = {}
        for path, sup in entries:
            for a in path:
                acc = agg.get(a)
                if acc is None:
                    acc = agg[a] = [0] * n
                if tree.grouped:
                    for c in range(n):
                        acc[c] |= sup[c]
                else:
                    for c in range(n):
                        acc[c] += sup[c]
        kept = {a for a, raw in agg.items() if keep(tree._count(raw))}
        entries = [([a for a in path if a in kept], sup) for path, sup in entries]

    for path, sup in entries:
        if path and any(sup):
            new._insert(path, sup)
    return new


def item_support(tree: FPTree, item: int) -> tuple[int, ...]:
    return tree.item_support(item)


def build_from_dataset(dataset: Dataset, is_frequent) -> tuple[FPTree, dict[int, frozenset], list[FrequentItem]]:
    frequent_items = collect_frequent_items(dataset, is_frequent)
    tree, coitems = build_fp_tree(dataset, frequent_items)
    return tree, coitems, frequent_items


__all__ = [
    "FPNode",
    "FPTree",
    "FrequentItem",
    "build_fp_tree",
    "build_from_dataset",
    "collect_frequent_items",
    "conditional_tree",
    "item_support",
]
