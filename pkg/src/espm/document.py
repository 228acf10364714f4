"""Output documents for mining runs.

The document is built as an ordered dict and rendered either as a
sectioned plain-text file (default, diff-friendly) or as JSON. Wall-clock
timings are only embedded on request so that repeated runs stay
byte-identical.
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Optional

from .dataset import Dataset
from .miner import MineResult
from .postprocess import InformativePatternSet, extract_attribute_values

FORMAT_TAG = "espm-patterns/1"


@dataclass
class RunReport:
    samples: int
    attributes: int
    items: int
    frequent_items: int
    labels: int
    patterns: int
    attribute_values: int
    mining_seconds: float = 0.0
    postprocess_seconds: float = 0.0

    @property
    def total_seconds(self) -> float:
        return self.mining_seconds + self.postprocess_seconds

    def to_dict(self, timing: bool = False) -> dict:
        out = {
            "samples": self.samples,
            "attributes": self.attributes,
            "items": self.items,
            "frequent_items": self.frequent_items,
            "labels": self.labels,
            "patterns": self.patterns,
            "attribute_values": self.attribute_values,
        }
        if timing:
            out["mining_seconds"] = self.mining_seconds
            out["postprocess_seconds"] = self.postprocess_seconds
            out["total_seconds"] = self.total_seconds
        return out


def make_report(dataset: Dataset, result: MineResult, pattern_set: InformativePatternSet) -> RunReport:
    return RunReport(
        samples=len(dataset),
        attributes=len(dataset.attributes),
        items=len(dataset.catalog),
        frequent_items=len(result.item_order),
        labels=len(dataset.label_names),
        patterns=len(pattern_set.patterns),
        attribute_values=len(pattern_set.attribute_values),
        mining_seconds=result.timing.get("mining_seconds", 0.0),
        postprocess_seconds=pattern_set.timing.get("postprocess_seconds", 0.0),
    )


def build_document(
    dataset: Dataset,
    result: MineResult,
    pattern_set: InformativePatternSet,
    timing: bool = False,
) -> dict:
    catalog = dataset.catalog
    names = dataset.label_names
    report = make_report(dataset, result, pattern_set)
    patterns = []
    for m in pattern_set.patterns:
        patterns.append(
            {
                "target": names[m.target],
                "items": [catalog.label(a) for a in m.pattern],
                "supports": {names[c]: s for c, s in enumerate(m.supports)},
                "p_value": m.p_value,
                "posterior": m.posterior,
            }
        )
    return {
        "format": FORMAT_TAG,
        "config": result.config.to_dict(),
        "dataset": {
            "samples": len(dataset),
            "attributes": len(dataset.attributes),
            "items": len(catalog),
            "frequent_items": len(result.item_order),
            "grouped": dataset.grouped,
            "label_counts": {names[c]: n for c, n in enumerate(result.label_counts)},
        },
        "thresholds": {str(i + 1): t for i, t in enumerate(pattern_set.thresholds)},
        "test_count": {str(i + 1): n for i, n in enumerate(result.test_count)},
        "provenance": pattern_set.provenance,
        "patterns": patterns,
        "attribute_values": [f"{a}={v}" for a, v in extract_attribute_values(pattern_set, catalog)],
        "report": report.to_dict(timing),
    }


def _scalar(v) -> str:
    if v is None:
        return "none"
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return repr(v)
    if isinstance(v, (list, tuple)):
        return "[" + ", ".join(_scalar(x) for x in v) + "]"
    if isinstance(v, dict):
        return " ".join(f"{k}:{_scalar(x)}" for k, x in v.items())
    return str(v)


def render_text(doc: dict) -> str:
    lines = [f"# {doc['format']}"]

    def section(title, mapping):
        lines.append("")
        lines.append(f"[{title}]")
        for k, v in mapping.items():
            lines.append(f"{k} = {_scalar(v)}")

    section("config", doc["config"])
    section("dataset", doc["dataset"])
    section("thresholds", doc["thresholds"])
    section("test_count", doc["test_count"])
    for label, stages in doc["provenance"].items():
        section(f"provenance {label}", stages)
    for i, p in enumerate(doc["patterns"], start=1):
        section(
            f"pattern {i}",
            {
                "target": p["target"],
                "items": " & ".join(p["items"]),
                "supports": p["supports"],
                "p_value": p["p_value"],
                "posterior": p["posterior"],
            },
        )
    lines.append("")
    lines.append("[attribute_values]")
    lines.extend(doc["attribute_values"])
    section("report", doc["report"])
    return "\n".join(lines) + "\n"


def render_json(doc: dict) -> str:
    return json.dumps(doc, indent=2) + "\n"


def render(doc: dict, fmt: Optional[str] = "text") -> str:
    if fmt == "json":
        return render_json(doc)
    return render_text(doc)
