"""Metric tables and run-to-run comparisons.

A RunReport holds the three grouped metric rows for one trained model
plus free-form metadata. Tables render to Markdown or CSV with values at
two decimals; comparisons report both the absolute delta and the relative
improvement percent over the baseline, since either alone is ambiguous.
Rounding happens only at render time.
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Sequence

from .detmetrics import GROUP_ROW_ORDER, ClassMetrics
from .errors import GroupMismatchError

__all__ = [
    "METRIC_COLUMNS",
    "RunReport",
    "ComparisonCell",
    "RunComparison",
    "render_table",
    "compare_runs",
    "render_comparison",
    "save_report",
    "load_report",
]

# (column header, ClassMetrics attribute) in table order.
METRIC_COLUMNS: tuple[tuple[str, str], ...] = (
    ("Precision", "precision"),
    ("Recall", "recall"),
    ("F1", "f1"),
    ("mAP50", "ap50"),
    ("mAP50-95", "ap50_95"),
)


@dataclass
class RunReport:
    """Grouped metric rows for one run, e.g. one trained model."""

    label: str
    rows: dict[str, ClassMetrics]
    metadata: dict[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        if set(self.rows) != set(GROUP_ROW_ORDER):
            raise ValueError(
                f"rows must cover exactly {GROUP_ROW_ORDER}, got {sorted(self.rows)}"
            )


def save_report(report: RunReport, path: Path | str) -> None:
    doc = {
        "label": report.label,
        "rows": {group: report.rows[group].to_dict() for group in GROUP_ROW_ORDER},
        "metadata": report.metadata,
    }
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(doc, indent=2) + "\n", encoding="utf-8")


def load_report(path: Path | str) -> RunReport:
    doc = json.loads(Path(path).read_text(encoding="utf-8"))
    return RunReport(
        label=doc["label"],
        rows={group: ClassMetrics.from_dict(row) for group, row in doc["rows"].items()},
        metadata=doc.get("metadata", {}),
    )


def _fmt(value: float) -> str:
    return f"{value:.2f}"


def _table_rows(reports: Sequence[RunReport]) -> list[list[str]]:
    rows = [["Algorithm", "Class"] + [header for header, _ in METRIC_COLUMNS]]
    for report in reports:
        for group in GROUP_ROW_ORDER:
            metrics = report.rows[group]
            rows.append(
                [report.label, group]
                + [_fmt(getattr(metrics, attr)) for _, attr in METRIC_COLUMNS]
            )
    return rows


def _render_markdown(rows: list[list[str]]) -> str:
    lines = ["| " + " | ".join(rows[0]) + " |",
             "|" + "|".join(" --- " for _ in rows[0]) + "|"]
    for row in rows[1:]:
        lines.append("| " + " | ".join(row) + " |")
    return "\n".join(lines) + "\n"


def _render_csv(rows: list[list[str]]) -> str:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerows(rows)
    return buffer.getvalue()


def render_table(reports: Sequence[RunReport], format: str = "markdown") -> str:
    """Render grouped metric rows for one or more runs.

    Row order is deterministic: reports in the given order, groups as
    All, Humans, Inanimate objects. Values are formatted to two decimals.
    """
    if not reports:
        raise ValueError("at least one report is required")
    rows = _table_rows(reports)
    if format == "markdown":
        return _render_markdown(rows)
    if format == "csv":
        return _render_csv(rows)
    raise ValueError(f"unknown format {format!r}")


@dataclass(frozen=True)
class ComparisonCell:
    """Baseline vs treatment for one (group, metric) pair.

    ``improvement_pct`` is 100 * delta / baseline, or None when the
    baseline is zero (rendered as "n/a").
    """

    group: str
    metric: str
    baseline: float
    treatment: float
    delta: float
    improvement_pct: float | None


@dataclass
class RunComparison:
    baseline_label: str
    treatment_label: str
    cells: list[ComparisonCell]


def compare_runs(baseline: RunReport, treatment: RunReport) -> RunComparison:
    """Cell-by-cell comparison of two runs over the same groups."""
    if set(baseline.rows) != set(treatment.rows):
        raise GroupMismatchError(
            f"group rows differ: {sorted(baseline.rows)} vs {sorted(treatment.rows)}"
        )
    cells = []
    for group in GROUP_ROW_ORDER:
        base_row = baseline.rows[group]
        treat_row = treatment.rows[group]
        for header, attr in METRIC_COLUMNS:
            base_value = getattr(base_row, attr)
            treat_value = getattr(treat_row, attr)
            delta = treat_value - base_value
            pct = 100.0 * delta / base_value if base_value > 0 else None
            cells.append(ComparisonCell(
                group=group, metric=header,
                baseline=base_value, treatment=treat_value,
                delta=delta, improvement_pct=pct,
            ))
    return RunComparison(
        baseline_label=baseline.label,
        treatment_label=treatment.label,
        cells=cells,
    )


def render_comparison(comparison: RunComparison, format: str = "markdown") -> str:
    """Render a comparison with signed deltas and relative improvements."""
    rows = [["Class", "Metric", comparison.baseline_label, comparison.treatment_label,
             "Delta", "Improvement"]]
    for cell in comparison.cells:
        pct = f"{cell.improvement_pct:+.1f}%" if cell.improvement_pct is not None else "n/a"
        rows.append([
            cell.group, cell.metric,
            _fmt(cell.baseline), _fmt(cell.treatment),
            f"{cell.delta:+.2f}", pct,
        ])
    if format == "markdown":
        return _render_markdown(rows)
    if format == "csv":
        return _render_csv(rows)
    raise ValueError(f"unknown format {format!r}")
