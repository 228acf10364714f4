"""Seeded synthetic tables with a planted label-informative conjunction."""
from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from .errors import ConfigError

CLASS_COLUMN = "class"


@dataclass(frozen=True)
class SynthSpec:
    samples: int = 100_000
    attributes: int = 30
    values: int = 1
    labels: int = 2
    planted: tuple[int, ...] = (0, 1, 2)
    posterior: float = 0.9
    base_rate: float = 0.5
    plant_rate: float = 0.1
    density: float = 0.3
    seed: int = 0

    def __post_init__(self):
        for name in ("samples", "attributes", "values"):
            if getattr(self, name) < 1:
                raise ConfigError(f"{name} must be positive")
        if self.labels < 2:
            raise ConfigError("need at least two labels")
        if len(self.planted) > self.attributes:
            raise ConfigError(
                f"planted pattern has {len(self.planted)} items but only "
                f"{self.attributes} attributes exist"
            )
        if len(set(self.planted)) != len(self.planted) or any(
            not 0 <= a < self.attributes for a in self.planted
        ):
            raise ConfigError(f"bad planted attribute indices {self.planted}")
        for name in ("posterior", "base_rate", "plant_rate", "density"):
            v = getattr(self, name)
            if not 0 <= v <= 1:
                raise ConfigError(f"{name} must lie in [0, 1], got {v}")

    def attribute_names(self) -> list[str]:
        width = len(str(self.attributes - 1))
        return [f"A{j:0{width}d}" for j in range(self.attributes)]

    def label_names(self) -> list[str]:
        return [f"L{c}" for c in range(self.labels)]

    @property
    def target(self) -> str:
        return "L0"

    def planted_items(self) -> list[tuple[str, str]]:
        names = self.attribute_names()
        return [(names[j], "v0") for j in self.planted]


def generate(spec: SynthSpec) -> tuple[list[list[str]], list[str]]:
    """Rows of cell strings ("" = missing) and their labels.

    Each cell is present with probability ``density`` and then takes one of
    ``values`` values uniformly. A ``plant_rate`` fraction of rows has the
    planted attributes forced to ``v0``. Rows covered by the planted
    conjunction get the target label with probability ``posterior``, all
    other rows with probability ``base_rate``; non-target rows spread
    uniformly over the remaining labels.
    """
    rng = np.random.default_rng(spec.seed)
    n, m = spec.samples, spec.attributes
    present = rng.random((n, m)) < spec.density
    vals = rng.integers(0, spec.values, size=(n, m))
    planted = list(spec.planted)
    if planted:
        rows = np.flatnonzero(rng.random(n) < spec.plant_rate)
        for j in planted:
            present[rows, j] = True
            vals[rows, j] = 0
        covered = (present[:, planted] & (vals[:, planted] == 0)).all(axis=1)
    else:
        covered = np.zeros(n, dtype=bool)
    u = rng.random(n)
    is_target = np.where(covered, u < spec.posterior, u < spec.base_rate)
    others = rng.integers(1, spec.labels, size=n)
    label_ids = np.where(is_target, 0, others)

    tokens = [f"v{k}" for k in range(spec.values)]
    cells = []
    for r in range(n):
        pr = present[r]
        vr = vals[r]
        cells.append([tokens[vr[j]] if pr[j] else "" for j in range(m)])
    names = spec.label_names()
    return cells, [names[c] for c in label_ids]


def write_csv(spec: SynthSpec, path) -> Path:
    path = Path(path)
    rows, labels = generate(spec)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(spec.attribute_names() + [CLASS_COLUMN])
        for row, lab in zip(rows, labels):
            w.writerow(row + [lab])
    return path


def parse_planted(text: str) -> tuple[int, ...]:
    """Parse ``"0,1,2"`` into attribute indices."""
    text = text.strip()
    if not text:
        return ()
    try:
        return tuple(int(x) for x in text.split(","))
    except ValueError:
        raise ConfigError(f"bad planted spec {text!r}; expected comma-separated indices") from None


def planted_ids(catalog, spec: SynthSpec) -> Sequence[int]:
    return [catalog.id_of(a, v) for a, v in spec.planted_items()]
