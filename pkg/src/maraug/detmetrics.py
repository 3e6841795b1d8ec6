"""Detection scoring: IoU, greedy matching, PR curves, AP, and grouped rows.

The protocol: detections are matched to same-class ground truth greedily
in descending confidence order at a given IoU threshold, each ground
truth absorbs at most one detection, and per-class average precision is
the area under the all-point interpolated precision/recall staircase.
mAP@0.5:0.95 averages the per-class APs over ten IoU thresholds. Scalar
precision/recall/F1 come from a confidence-threshold sweep that maximizes
F1 (ties resolved toward the lower threshold, favoring recall) or from a
caller-fixed threshold. Classes without ground truth in the evaluated set
are excluded from every mean rather than scored zero.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Mapping, Sequence

import numpy as np

from .datasetio import (
    Annotation,
    ClassTaxonomy,
    DatasetManifest,
    Detection,
    ObjectGroup,
    Split,
    parse_label_file,
    parse_prediction_file,
    safe_stem,
)
from .errors import EmptyGroupError, IdCollisionError, MissingSourceError

__all__ = [
    "MAP_THRESHOLDS",
    "SCALAR_IOU_THRESHOLD",
    "GROUP_ALL",
    "GROUP_HUMANS",
    "GROUP_INANIMATE",
    "GROUP_ROW_ORDER",
    "DetectionMatch",
    "MatchResult",
    "PrCurve",
    "ClassMetrics",
    "EvaluationResult",
    "iou",
    "match_detections",
    "combine_matches",
    "pr_curve",
    "average_precision",
    "map_range",
    "scalar_prf",
    "grouped_metrics",
    "evaluate_samples",
    "collect_samples",
]

# IoU thresholds 0.50, 0.55, ..., 0.95 for the averaged mAP.
MAP_THRESHOLDS: tuple[float, ...] = tuple(i / 100.0 for i in range(50, 100, 5))

# Scalar P/R/F1 and the headline AP column are computed at this threshold.
SCALAR_IOU_THRESHOLD = 0.50

GROUP_ALL = "All"
GROUP_HUMANS = "Humans"
GROUP_INANIMATE = "Inanimate objects"
GROUP_ROW_ORDER = (GROUP_ALL, GROUP_HUMANS, GROUP_INANIMATE)

_GROUP_LABELS = {ObjectGroup.HUMAN: GROUP_HUMANS, ObjectGroup.INANIMATE: GROUP_INANIMATE}


def iou(a, b) -> float:
    """Intersection over union of two center/size boxes; 0 when disjoint."""
    ax1, ay1, ax2, ay2 = a.corners()
    bx1, by1, bx2, by2 = b.corners()
    iw = min(ax2, bx2) - max(ax1, bx1)
    ih = min(ay2, by2) - max(ay1, by1)
    if iw <= 0.0 or ih <= 0.0:
        return 0.0
    inter = iw * ih
    union = a.area() + b.area() - inter
    if union <= 0.0:
        return 0.0
    return inter / union


@dataclass(frozen=True)
class DetectionMatch:
    """Outcome of one detection after matching."""

    image_id: str
    class_id: int
    confidence: float
    is_true_positive: bool
    gt_index: int | None


@dataclass
class MatchResult:
    """Matched detections plus per-class ground-truth totals."""

    detections: list[DetectionMatch]
    gt_counts: dict[int, int]

    def class_ids(self) -> set[int]:
        return {d.class_id for d in self.detections} | set(self.gt_counts)

    def for_class(self, class_id: int) -> "MatchResult":
        return MatchResult(
            detections=[d for d in self.detections if d.class_id == class_id],
            gt_counts={class_id: self.gt_counts.get(class_id, 0)},
        )

    def total_gt(self) -> int:
        return sum(self.gt_counts.values())


def _det_sort_key(det: Detection):
    b = det.box
    return (-det.confidence, det.class_id, b.cx, b.cy, b.w, b.h)


def match_detections(
    dets: Sequence[Detection],
    gts: Sequence[Annotation],
    iou_thresh: float,
    image_id: str = "",
) -> MatchResult:
    """Greedy same-class matching for one image.

    Detections are visited in descending confidence (ties broken by class
    id then box fields for determinism). Each detection claims the
    highest-IoU still-unmatched ground truth of its own class, provided
    the IoU reaches the threshold; everything else is a false positive.
    """
    if not 0.0 < iou_thresh < 1.0:
        raise ValueError(f"iou_thresh={iou_thresh} outside (0, 1)")

    gt_counts: dict[int, int] = {}
    for gt in gts:
        gt_counts[gt.class_id] = gt_counts.get(gt.class_id, 0) + 1

    taken = [False] * len(gts)
    matched: list[DetectionMatch] = []
    for det in sorted(dets, key=_det_sort_key):
        best_iou = 0.0
        best_index: int | None = None
        for gt_index, gt in enumerate(gts):
            if taken[gt_index] or gt.class_id != det.class_id:
                continue
            overlap = iou(det.box, gt.box)
            if overlap >= iou_thresh and overlap > best_iou:
                best_iou = overlap
                best_index = gt_index
        if best_index is not None:
            taken[best_index] = True
        matched.append(DetectionMatch(
            image_id=image_id,
            class_id=det.class_id,
            confidence=det.confidence,
            is_true_positive=best_index is not None,
            gt_index=best_index,
        ))
    return MatchResult(detections=matched, gt_counts=gt_counts)


def combine_matches(results: Iterable[MatchResult]) -> MatchResult:
    """Pool per-image match results into one."""
    detections: list[DetectionMatch] = []
    gt_counts: dict[int, int] = {}
    for result in results:
        detections.extend(result.detections)
        for class_id, count in result.gt_counts.items():
            gt_counts[class_id] = gt_counts.get(class_id, 0) + count
    return MatchResult(detections=detections, gt_counts=gt_counts)


@dataclass(frozen=True)
class PrCurve:
    """(recall, precision) after each detection of a descending-confidence sweep."""

    points: tuple[tuple[float, float], ...]


def _single_class_flags(matches: MatchResult) -> tuple[np.ndarray, int]:
    """Ordered TP flags and ground-truth count for a single-class result."""
    if len(matches.class_ids()) > 1:
        raise ValueError("expected a MatchResult restricted to one class")
    ordered = sorted(matches.detections, key=lambda d: (-d.confidence, d.image_id))
    flags = np.array([d.is_true_positive for d in ordered], dtype=bool)
    return flags, matches.total_gt()


def pr_curve(matches: MatchResult) -> PrCurve:
    """Precision/recall staircase for one class across all images."""
    flags, n_gt = _single_class_flags(matches)
    if flags.size == 0 or n_gt == 0:
        return PrCurve(points=())
    tp = np.cumsum(flags)
    ranks = np.arange(1, flags.size + 1)
    recall = tp / n_gt
    precision = tp / ranks
    return PrCurve(points=tuple(zip(recall.tolist(), precision.tolist())))


def average_precision(matches: MatchResult) -> float:
    """All-point interpolated AP for one class across all images.

    Returns 0 when the class has no ground truth; callers exclude such
    classes from any mean.
    """
    flags, n_gt = _single_class_flags(matches)
    if n_gt == 0 or flags.size == 0:
        return 0.0
    tp = np.cumsum(flags)
    recall = tp / n_gt
    precision = tp / np.arange(1, flags.size + 1)
    envelope = np.maximum.accumulate(precision[::-1])[::-1]
    prev_recall = np.concatenate(([0.0], recall[:-1]))
    return float(np.sum((recall - prev_recall) * envelope))


Sample = tuple[Sequence[Detection], Sequence[Annotation]]


def _matches_at(samples: Mapping[str, Sample], threshold: float) -> MatchResult:
    return combine_matches(
        match_detections(dets, gts, threshold, image_id=image_id)
        for image_id, (dets, gts) in sorted(samples.items())
    )


def map_range(
    samples: Mapping[str, Sample],
    thresholds: Sequence[float] = MAP_THRESHOLDS,
) -> float:
    """Mean over ten IoU thresholds of the mean per-class AP.

    Classes with no ground truth anywhere in the samples are excluded at
    every threshold.
    """
    if len(thresholds) != 10:
        raise ValueError(f"expected exactly 10 thresholds, got {len(thresholds)}")
    per_threshold = []
    for threshold in thresholds:
        pooled = _matches_at(samples, threshold)
        eligible = [c for c, n in pooled.gt_counts.items() if n > 0]
        if not eligible:
            return 0.0
        aps = [average_precision(pooled.for_class(c)) for c in sorted(eligible)]
        per_threshold.append(sum(aps) / len(aps))
    return sum(per_threshold) / len(per_threshold)


def scalar_prf(
    matches: MatchResult,
    strategy: float | str = "max-f1",
) -> tuple[float, float, float]:
    """Scalar precision/recall/F1 from a match result.

    ``strategy`` is either the string "max-f1" (sweep the distinct
    confidence values and keep the threshold maximizing F1, preferring the
    lower threshold on ties) or a fixed confidence threshold. Conventions:
    precision is 0 without kept predictions, recall is 0 without ground
    truth, and F1 is 0 whenever P + R is 0.
    """
    n_gt = matches.total_gt()
    ordered = sorted(matches.detections, key=lambda d: (-d.confidence, d.image_id))

    def prf(tp: int, fp: int) -> tuple[float, float, float]:
        precision = tp / (tp + fp) if tp + fp > 0 else 0.0
        recall = tp / n_gt if n_gt > 0 else 0.0
        f1 = 2 * precision * recall / (precision + recall) if precision + recall > 0 else 0.0
        return precision, recall, f1

    if isinstance(strategy, str):
        if strategy != "max-f1":
            raise ValueError(f"unknown strategy {strategy!r}")
        if not ordered:
            return (0.0, 0.0, 0.0)
        best: tuple[float, float, float] | None = None
        best_f1 = -1.0
        tp = fp = 0
        for i, det in enumerate(ordered):
            if det.is_true_positive:
                tp += 1
            else:
                fp += 1
            last_of_threshold = i + 1 == len(ordered) or ordered[i + 1].confidence != det.confidence
            if not last_of_threshold:
                continue
            precision, recall, f1 = prf(tp, fp)
            # Thresholds are visited in decreasing order, so >= keeps the
            # lowest threshold among F1 ties.
            if f1 >= best_f1:
                best_f1 = f1
                best = (precision, recall, f1)
        assert best is not None
        return best

    threshold = float(strategy)
    tp = sum(1 for d in ordered if d.confidence >= threshold and d.is_true_positive)
    fp = sum(1 for d in ordered if d.confidence >= threshold and not d.is_true_positive)
    return prf(tp, fp)


@dataclass(frozen=True)
class ClassMetrics:
    """One metric row: scalars, both AP flavors, and the ground-truth count."""

    precision: float
    recall: float
    f1: float
    ap50: float
    ap50_95: float
    support: int

    def __post_init__(self):
        for name in ("precision", "recall", "f1", "ap50", "ap50_95"):
            value = getattr(self, name)
            if not 0.0 <= value <= 1.0 or math.isnan(value):
                raise ValueError(f"{name}={value} outside [0, 1]")
        if self.support < 0:
            raise ValueError("support must be nonnegative")

    def to_dict(self) -> dict:
        return {
            "precision": self.precision,
            "recall": self.recall,
            "f1": self.f1,
            "ap50": self.ap50,
            "ap50_95": self.ap50_95,
            "support": self.support,
        }

    @classmethod
    def from_dict(cls, data: Mapping) -> "ClassMetrics":
        return cls(
            precision=float(data["precision"]),
            recall=float(data["recall"]),
            f1=float(data["f1"]),
            ap50=float(data["ap50"]),
            ap50_95=float(data["ap50_95"]),
            support=int(data["support"]),
        )


def _mean_row(rows: Sequence[ClassMetrics]) -> ClassMetrics:
    n = len(rows)
    return ClassMetrics(
        precision=sum(r.precision for r in rows) / n,
        recall=sum(r.recall for r in rows) / n,
        f1=sum(r.f1 for r in rows) / n,
        ap50=sum(r.ap50 for r in rows) / n,
        ap50_95=sum(r.ap50_95 for r in rows) / n,
        support=sum(r.support for r in rows),
    )


def grouped_metrics(
    per_class: Mapping[int, ClassMetrics],
    taxonomy: ClassTaxonomy,
) -> dict[str, ClassMetrics]:
    """Macro-average class rows into All / Humans / Inanimate objects rows.

    Each group row is the unweighted mean of its member classes' metrics;
    supports are summed. Raises EmptyGroupError when a taxonomy group has
    no evaluated class.
    """
    if not per_class:
        raise ValueError("per_class must be nonempty")
    for class_id in per_class:
        if class_id not in taxonomy:
            raise ValueError(f"class id {class_id} not in taxonomy")

    rows = {GROUP_ALL: _mean_row([per_class[c] for c in sorted(per_class)])}
    for group, label in _GROUP_LABELS.items():
        members = [per_class[c] for c in sorted(per_class) if taxonomy.group(c) is group]
        if not members:
            raise EmptyGroupError(f"no evaluated class in group {label!r}")
        rows[label] = _mean_row(members)
    return rows


@dataclass
class EvaluationResult:
    """Per-class and grouped metric rows plus dataset counts."""

    per_class: dict[int, ClassMetrics]
    groups: dict[str, ClassMetrics]
    image_count: int
    gt_count: int
    detection_count: int


def evaluate_samples(
    samples: Mapping[str, Sample],
    taxonomy: ClassTaxonomy,
    scalar_strategy: float | str = "max-f1",
) -> EvaluationResult:
    """Score detections against ground truth over a set of images.

    Produces, per class with ground truth: max-F1 (or fixed-threshold)
    precision/recall/F1 at IoU 0.5, AP at 0.5, and AP averaged over the
    0.5:0.95 thresholds; then the three grouped rows.
    """
    pooled = {t: _matches_at(samples, t) for t in MAP_THRESHOLDS}
    base = pooled[SCALAR_IOU_THRESHOLD]
    eligible = sorted(c for c, n in base.gt_counts.items() if n > 0)
    if not eligible:
        raise ValueError("no ground-truth objects in the evaluated samples")

    per_class: dict[int, ClassMetrics] = {}
    for class_id in eligible:
        precision, recall, f1 = scalar_prf(base.for_class(class_id), scalar_strategy)
        ap_per_threshold = [
            average_precision(pooled[t].for_class(class_id)) for t in MAP_THRESHOLDS
        ]
        per_class[class_id] = ClassMetrics(
            precision=precision,
            recall=recall,
            f1=f1,
            ap50=average_precision(base.for_class(class_id)),
            ap50_95=sum(ap_per_threshold) / len(ap_per_threshold),
            support=base.gt_counts[class_id],
        )

    return EvaluationResult(
        per_class=per_class,
        groups=grouped_metrics(per_class, taxonomy),
        image_count=len(samples),
        gt_count=base.total_gt(),
        detection_count=sum(len(dets) for dets, _ in samples.values()),
    )


def collect_samples(
    manifest: DatasetManifest,
    predictions_dir: Path | str,
    split: Split | None = Split.TEST,
) -> tuple[dict[str, Sample], list[str]]:
    """Load detections and ground truth for every image of a split.

    Predictions live one file per image at ``<predictions_dir>/<stem>.txt``
    where stem is the filesystem-safe image id. A missing prediction file
    means the detector found nothing; it is recorded in the returned
    diagnostics rather than treated as an error. Missing or unparsable
    label/prediction content raises.
    """
    predictions_dir = Path(predictions_dir)
    if not predictions_dir.is_dir():
        raise MissingSourceError(f"predictions directory missing: {predictions_dir}")

    records = [r for r in manifest.records if split is None or r.split is split]
    stems: dict[str, str] = {}
    for record in records:
        stem = safe_stem(record.image_id)
        if stem in stems:
            raise IdCollisionError(
                f"image ids {stems[stem]!r} and {record.image_id!r} collide as filename {stem!r}"
            )
        stems[stem] = record.image_id

    samples: dict[str, Sample] = {}
    diagnostics: list[str] = []
    for record in records:
        if not record.label_path.is_file():
            raise MissingSourceError(f"label file missing: {record.label_path}")
        gts = parse_label_file(
            record.label_path.read_text(encoding="utf-8"), source=str(record.label_path)
        )
        pred_path = predictions_dir / f"{safe_stem(record.image_id)}.txt"
        if pred_path.is_file():
            dets = parse_prediction_file(pred_path.read_text(encoding="utf-8"), source=str(pred_path))
        else:
            dets = []
            diagnostics.append(f"no prediction file for {record.image_id} (assumed zero detections)")
        samples[record.image_id] = (dets, gts)
    return samples, diagnostics
