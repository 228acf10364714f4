"""Tabular ingestion: CSV parsing, numeric binning and item interning."""
from __future__ import annotations

import bisect
import csv
import math
import re
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Mapping, Optional, Sequence

from .errors import BinningError, EmptyInputError, ParseError, SchemaError

DEFAULT_MISSING = ("", "?")

_DECIMAL = re.compile(r"^[+-]?(\d+(\.\d*)?|\.\d+)([eE][+-]?\d+)?$")


class ItemCatalog:
    """Bijection between (attribute, value) pairs and dense item ids."""

    def __init__(self, entries: Iterable[tuple[str, str]] = ()):
        self._entries: list[tuple[str, str]] = []
        self._index: dict[tuple[str, str], int] = {}
        for attribute, value in entries:
            self.intern(attribute, value)

    def intern(self, attribute: str, value: str) -> int:
        key = (attribute, value)
        item = self._index.get(key)
        if item is None:
            item = len(self._entries)
            self._entries.append(key)
            self._index[key] = item
        return item

    def id_of(self, attribute: str, value: str) -> int:
        return self._index[(attribute, value)]

    def decode(self, item: int) -> tuple[str, str]:
        return self._entries[item]

    def label(self, item: int) -> str:
        attribute, value = self._entries[item]
        return f"{attribute}={value}"

    @property
    def entries(self) -> tuple[tuple[str, str], ...]:
        return tuple(self._entries)

    def __len__(self):
        return len(self._entries)

    def __eq__(self, other):
        return isinstance(other, ItemCatalog) and self._entries == other._entries

    def __repr__(self):
        return f"ItemCatalog({len(self)} items)"


@dataclass(frozen=True)
class BinningSpec:
    strategy: str = "equal-width"
    bin_count: int = 5
    # column name -> spec, or None to keep that numeric column nominal
    overrides: Mapping[str, Optional["BinningSpec"]] = field(default_factory=dict)

    def __post_init__(self):
        if self.strategy not in ("equal-width", "equal-frequency"):
            raise BinningError(f"unknown binning strategy {self.strategy!r}")
        if self.bin_count < 2:
            raise BinningError("bin_count must be at least 2")

    @classmethod
    def parse(cls, text: str) -> "BinningSpec":
        """Parse ``STRATEGY:K``, e.g. ``equal-frequency:4``."""
        strategy, _, count = text.partition(":")
        aliases = {"width": "equal-width", "freq": "equal-frequency"}
        strategy = aliases.get(strategy, strategy)
        try:
            k = int(count) if count else 5
        except ValueError:
            raise BinningError(f"bad bin count in {text!r}") from None
        return cls(strategy, k)

    def for_column(self, name: str) -> Optional["BinningSpec"]:
        if name in self.overrides:
            return self.overrides[name]
        return self


@dataclass(frozen=True)
class Dataset:
    """Interned samples with labels.

    ``transactions[i]`` is the sorted tuple of item ids of sample ``i`` and
    ``labels[i]`` its label id. When ``groups`` is set, supports and label
    counts are measured in distinct group keys instead of samples.
    """

    transactions: tuple[tuple[int, ...], ...]
    labels: tuple[int, ...]
    label_names: tuple[str, ...]
    catalog: ItemCatalog
    groups: Optional[tuple[str, ...]] = None
    attributes: tuple[str, ...] = ()

    def __post_init__(self):
        if len(self.transactions) != len(self.labels):
            raise ValueError("transactions and labels differ in length")
        if self.groups is not None and len(self.groups) != len(self.labels):
            raise ValueError("groups and labels differ in length")
        n_items = len(self.catalog)
        n_labels = len(self.label_names)
        for t in self.transactions:
            if len(set(t)) != len(t):
                raise ValueError(f"duplicate item in sample {t}")
            if t and (min(t) < 0 or max(t) >= n_items):
                raise ValueError(f"unknown item id in sample {t}")
        for c in self.labels:
            if not 0 <= c < n_labels:
                raise ValueError(f"unknown label id {c}")

    @property
    def grouped(self) -> bool:
        return self.groups is not None

    def __len__(self):
        return len(self.labels)

    @classmethod
    def from_records(
        cls,
        records: Sequence[Iterable],
        labels: Sequence[str],
        groups: Optional[Sequence[str]] = None,
        label_names: Optional[Sequence[str]] = None,
    ) -> "Dataset":
        """Build a dataset from in-memory samples.

        Each record is an iterable of items; an item is an ``(attribute,
        value)`` pair or a bare string, which is interned as ``(name, "1")``.
        """
        catalog = ItemCatalog()
        transactions = []
        for record in records:
            ids = set()
            for item in record:
                if isinstance(item, str):
                    item = (item, "1")
                ids.add(catalog.intern(*item))
            transactions.append(tuple(sorted(ids)))
        names = list(label_names) if label_names is not None else []
        for lab in labels:
            if lab not in names:
                names.append(lab)
        lookup = {name: i for i, name in enumerate(names)}
        attributes = tuple(dict.fromkeys(a for a, _ in catalog.entries))
        return cls(
            tuple(transactions),
            tuple(lookup[lab] for lab in labels),
            tuple(names),
            catalog,
            tuple(groups) if groups is not None else None,
            attributes,
        )

    def without_groups(self) -> "Dataset":
        return Dataset(
            self.transactions, self.labels, self.label_names, self.catalog,
            None, self.attributes,
        )

    def describe(self) -> dict:
        """Summary in the shape of a dataset description table row."""
        return {
            "samples": len(self),
            "attributes": len(self.attributes),
            "items": len(self.catalog),
            "labels": len(self.label_names),
            "groups": len(set(self.groups)) if self.groups is not None else None,
        }


def label_counts(dataset: Dataset) -> list[int]:
    """Samples per label, or distinct groups per label in group mode."""
    k = len(dataset.label_names)
    if dataset.groups is None:
        counts = [0] * k
        for c in dataset.labels:
            counts[c] += 1
        return counts
    seen = [set() for _ in range(k)]
    for c, g in zip(dataset.labels, dataset.groups):
        seen[c].add(g)
    return [len(s) for s in seen]


# -- binning ----------------------------------------------------------------


def _fmt(x: float) -> str:
    if x == int(x) and abs(x) < 1e15:
        return str(int(x))
    return repr(float(x))


def bin_numeric(values: Sequence[Optional[float]], spec: BinningSpec) -> list[Optional[str]]:
    """Map numeric values to bin labels; ``None`` (missing) stays ``None``.

    Equal-width bins are half-open ``[lo,hi)`` with the last one closed.
    Equal-frequency bins cut at empirical quantiles and put values equal to
    a cut point in the lower bin, so they are labelled ``[lo,hi]`` for the
    first bin and ``(lo,hi]`` afterwards.
    """
    present = [v for v in values if v is not None]
    if not present:
        raise BinningError("cannot bin a column without numeric values")
    lo, hi = min(present), max(present)
    if lo == hi:
        label = f"[{_fmt(lo)},{_fmt(hi)}]"
        return [None if v is None else label for v in values]

    if spec.strategy == "equal-width":
        k = spec.bin_count
        width = (hi - lo) / k
        edges = [lo + i * width for i in range(k)] + [hi]
        labels = [
            f"[{_fmt(edges[i])},{_fmt(edges[i + 1])}{']' if i == k - 1 else ')'}"
            for i in range(k)
        ]
        out = []
        for v in values:
            if v is None:
                out.append(None)
                continue
            i = bisect.bisect_right(edges, v) - 1
            out.append(labels[min(max(i, 0), k - 1)])
        return out

    ordered = sorted(present)
    n = len(ordered)
    cuts = []
    for i in range(1, spec.bin_count):
        idx = math.ceil(i * n / spec.bin_count) - 1
        cut = ordered[max(idx, 0)]
        if cut < hi and (not cuts or cut > cuts[-1]):
            cuts.append(cut)
    edges = [lo] + cuts + [hi]
    labels = [f"[{_fmt(edges[0])},{_fmt(edges[1])}]"] + [
        f"({_fmt(edges[i])},{_fmt(edges[i + 1])}]" for i in range(1, len(edges) - 1)
    ]
    out = []
    for v in values:
        if v is None:
            out.append(None)
        else:
            out.append(labels[bisect.bisect_left(cuts, v)])
    return out


# -- CSV --------------------------------------------------------------------


def _is_number(text: str) -> bool:
    return bool(_DECIMAL.match(text.strip()))


def load_csv(
    path,
    class_column: str,
    group_column: Optional[str] = None,
    binning: Optional[BinningSpec] = None,
    missing: Sequence[str] = DEFAULT_MISSING,
    delimiter: Optional[str] = None,
) -> Dataset:
    """Read a headed CSV/TSV file into a :class:`Dataset`.

    Every cell other than the class and group columns becomes one item
    ``(column, value)``; missing cells produce no item. Numeric columns are
    binned when ``binning`` is given and kept as nominal strings otherwise.
    """
    path = Path(path)
    if delimiter is None:
        delimiter = "\t" if path.suffix.lower() in (".tsv", ".tab") else ","
    missing = set(missing)
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh, delimiter=delimiter)
        try:
            header = next(reader)
        except StopIteration:
            raise EmptyInputError(f"{path}: no header row") from None
        except csv.Error as exc:
            raise ParseError(str(exc), row=1) from None
        header = [h.strip() for h in header]
        if class_column not in header:
            raise SchemaError(f"{path}: class column {class_column!r} not found")
        if group_column is not None and group_column not in header:
            raise SchemaError(f"{path}: group column {group_column!r} not found")
        if len(set(header)) != len(header):
            dup = [h for h, n in Counter(header).items() if n > 1]
            raise SchemaError(f"{path}: duplicate column names {dup}")
        rows = []
        try:
            for rownum, row in enumerate(reader, start=2):
                if not row:
                    continue
                if len(row) != len(header):
                    raise ParseError(
                        f"expected {len(header)} fields, found {len(row)}", row=rownum
                    )
                rows.append((rownum, [cell.strip() for cell in row]))
        except csv.Error as exc:
            raise ParseError(str(exc), row=reader.line_num) from None

    if not rows:
        raise EmptyInputError(f"{path}: no data rows")

    ci = header.index(class_column)
    gi = header.index(group_column) if group_column is not None else None
    for rownum, row in rows:
        if row[ci] in missing:
            raise ParseError(f"missing value in class column {class_column!r}", row=rownum)

    attr_cols = [j for j in range(len(header)) if j != ci and j != gi]
    columns: dict[int, list[Optional[str]]] = {}
    for j in attr_cols:
        cells = [None if row[j] in missing else row[j] for _, row in rows]
        col_spec = binning.for_column(header[j]) if binning is not None else None
        present = [c for c in cells if c is not None]
        if col_spec is not None and present and all(_is_number(c) for c in present):
            nums = [None if c is None else float(c) for c in cells]
            cells = bin_numeric(nums, col_spec)
        columns[j] = cells

    catalog = ItemCatalog()
    item_columns = {}
    for j in attr_cols:
        item_columns[j] = [
            None if v is None else catalog.intern(header[j], v) for v in columns[j]
        ]
    transactions = []
    for i in range(len(rows)):
        ids = [item_columns[j][i] for j in attr_cols if item_columns[j][i] is not None]
        transactions.append(tuple(sorted(ids)))

    names: list[str] = []
    lookup: dict[str, int] = {}
    labels = []
    for _, row in rows:
        lab = row[ci]
        if lab not in lookup:
            lookup[lab] = len(names)
            names.append(lab)
        labels.append(lookup[lab])
    groups = tuple(row[gi] for _, row in rows) if gi is not None else None
    return Dataset(
        tuple(transactions),
        tuple(labels),
        tuple(names),
        catalog,
        groups,
        tuple(header[j] for j in attr_cols),
    )
