"""Dataset plumbing: label files, manifests, merging, and the grouped split.

Label files follow the one-object-per-line text convention
(``class cx cy w h``, normalized decimals). A dataset is described by a
JSON manifest listing every image together with its label file, source
group id, weather condition, and split assignment. Paths inside a saved
manifest are relative to the manifest file so trees stay portable.
"""

from __future__ import annotations

import enum
import json
import math
import os
import re
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Iterable, Mapping, Sequence

from .conditions import WeatherCondition
from .errors import (
    IdCollisionError,
    MalformedLineError,
    OutOfRangeError,
    RemapIncompleteError,
)
from .rng import SplitMix64, derive_seed

__all__ = [
    "Split",
    "ObjectGroup",
    "BoundingBox",
    "Annotation",
    "Detection",
    "ClassTaxonomy",
    "ManifestRecord",
    "DatasetManifest",
    "Violation",
    "parse_label_file",
    "write_label_file",
    "parse_prediction_file",
    "load_manifest",
    "save_manifest",
    "merge_datasets",
    "grouped_split",
    "validate_manifest",
    "maritime_taxonomy",
    "safe_stem",
]


class Split(enum.Enum):
    TRAIN = "train"
    VAL = "val"
    TEST = "test"
    UNASSIGNED = "unassigned"


class ObjectGroup(enum.Enum):
    HUMAN = "human"
    INANIMATE = "inanimate"


@dataclass(frozen=True)
class BoundingBox:
    """Normalized center/size box: all fields are fractions of image size."""

    cx: float
    cy: float
    w: float
    h: float

    def __post_init__(self):
        for name in ("cx", "cy", "w", "h"):
            value = getattr(self, name)
            if not 0.0 <= value <= 1.0:
                raise ValueError(f"{name}={value} outside [0, 1]")
        if self.w <= 0.0 or self.h <= 0.0:
            raise ValueError(f"box size must be positive, got w={self.w}, h={self.h}")

    def corners(self) -> tuple[float, float, float, float]:
        """(x1, y1, x2, y2) corner form."""
        return (
            self.cx - self.w / 2.0,
            self.cy - self.h / 2.0,
            self.cx + self.w / 2.0,
            self.cy + self.h / 2.0,
        )

    def area(self) -> float:
        return self.w * self.h


@dataclass(frozen=True)
class Annotation:
    """A ground-truth object: class id plus box."""

    class_id: int
    box: BoundingBox

    def __post_init__(self):
        if self.class_id < 0:
            raise ValueError(f"class_id={self.class_id} must be nonnegative")


@dataclass(frozen=True)
class Detection:
    """A detector output: class id, box, and confidence."""

    class_id: int
    box: BoundingBox
    confidence: float

    def __post_init__(self):
        if self.class_id < 0:
            raise ValueError(f"class_id={self.class_id} must be nonnegative")
        if not 0.0 <= self.confidence <= 1.0:
            raise ValueError(f"confidence={self.confidence} outside [0, 1]")


@dataclass(frozen=True)
class ClassTaxonomy:
    """Dense class-id table mapping each id to a name and object group.

    Class ``i`` is ``entries[i]``. At least one class must belong to the
    human group so grouped evaluation is always meaningful.
    """

    entries: tuple[tuple[str, ObjectGroup], ...]

    def __post_init__(self):
        if not self.entries:
            raise ValueError("taxonomy must define at least one class")
        names = [name for name, _ in self.entries]
        if len(set(names)) != len(names):
            raise ValueError("class names must be unique")
        if not any(group is ObjectGroup.HUMAN for _, group in self.entries):
            raise ValueError("taxonomy must contain at least one human class")

    def __len__(self) -> int:
        return len(self.entries)

    def __contains__(self, class_id: int) -> bool:
        return 0 <= class_id < len(self.entries)

    def name(self, class_id: int) -> str:
        return self.entries[class_id][0]

    def group(self, class_id: int) -> ObjectGroup:
        return self.entries[class_id][1]

    def class_ids(self) -> range:
        return range(len(self.entries))

    def ids_in_group(self, group: ObjectGroup) -> list[int]:
        return [i for i, (_, g) in enumerate(self.entries) if g is group]

    def id_of(self, name: str) -> int:
        for i, (n, _) in enumerate(self.entries):
            if n == name:
                return i
        raise KeyError(f"no class named {name!r}")

    def to_json(self) -> list[dict]:
        return [
            {"id": i, "name": name, "group": group.value}
            for i, (name, group) in enumerate(self.entries)
        ]

    @classmethod
    def from_json(cls, data: Sequence[Mapping]) -> "ClassTaxonomy":
        ordered = sorted(data, key=lambda e: e["id"])
        if [e["id"] for e in ordered] != list(range(len(ordered))):
            raise ValueError("taxonomy ids must be dense from 0")
        return cls(tuple((e["name"], ObjectGroup(e["group"])) for e in ordered))


def maritime_taxonomy() -> ClassTaxonomy:
    """The example taxonomy for aerial maritime data: one human class plus
    the common floating-object classes."""
    return ClassTaxonomy(
        (
            ("human", ObjectGroup.HUMAN),
            ("boat", ObjectGroup.INANIMATE),
            ("surfboard", ObjectGroup.INANIMATE),
            ("sailboat", ObjectGroup.INANIMATE),
            ("kayak", ObjectGroup.INANIMATE),
        )
    )


@dataclass(frozen=True)
class ManifestRecord:
    """One image entry: where its files live and how it is categorized."""

    image_id: str
    image_path: Path
    label_path: Path
    group_id: str
    condition: WeatherCondition = WeatherCondition.DAY_CLEAR
    split: Split = Split.UNASSIGNED

    def __post_init__(self):
        if not self.image_id:
            raise ValueError("image_id must be nonempty")
        if not self.group_id:
            raise ValueError("group_id must be nonempty")


@dataclass
class DatasetManifest:
    """All records of a dataset plus its class taxonomy and provenance notes."""

    records: list[ManifestRecord]
    taxonomy: ClassTaxonomy
    notes: list[str] = field(default_factory=list)

    def __post_init__(self):
        seen: set[str] = set()
        for record in self.records:
            if record.image_id in seen:
                raise IdCollisionError(f"duplicate image id: {record.image_id}")
            seen.add(record.image_id)

    def __len__(self) -> int:
        return len(self.records)

    def by_id(self) -> dict[str, ManifestRecord]:
        return {r.image_id: r for r in self.records}

    def group_ids(self) -> list[str]:
        """Distinct group ids, sorted."""
        return sorted({r.group_id for r in self.records})


_SAFE_CHARS = re.compile(r"[^A-Za-z0-9._-]")


def safe_stem(image_id: str) -> str:
    """Turn an image id into a filesystem-safe file stem."""
    return _SAFE_CHARS.sub("_", image_id)


# ---------------------------------------------------------------------------
# Label and prediction files


def _parse_object_lines(text: str, n_fields: int, source: str | None) -> Iterable[tuple[int, list[str]]]:
    where = f"{source}: " if source else ""
    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line:
            continue
        fields = line.split()
        if len(fields) != n_fields:
            raise MalformedLineError(
                f"{where}expected {n_fields} fields, got {len(fields)}", line_no
            )
        yield line_no, fields


def _parse_box(fields: Sequence[str], line_no: int, where: str) -> tuple[int, BoundingBox]:
    try:
        class_id = int(fields[0])
        values = [float(f) for f in fields[1:5]]
    except ValueError as exc:
        raise MalformedLineError(f"{where}non-numeric field: {exc}", line_no) from exc
    if class_id < 0:
        raise OutOfRangeError(f"{where}negative class id {class_id}", line_no)
    try:
        box = BoundingBox(*values)
    except ValueError as exc:
        raise OutOfRangeError(f"{where}{exc}", line_no) from exc
    return class_id, box


def parse_label_file(text: str, source: str | None = None) -> list[Annotation]:
    """Parse ground-truth label text, one ``class cx cy w h`` per line.

    Raises MalformedLineError for field-count or numeric problems and
    OutOfRangeError when a value violates the box invariants; both carry
    the offending line number.
    """
    where = f"{source}: " if source else ""
    annotations = []
    for line_no, fields in _parse_object_lines(text, 5, source):
        class_id, box = _parse_box(fields, line_no, where)
        annotations.append(Annotation(class_id, box))
    return annotations


def write_label_file(annotations: Sequence[Annotation]) -> str:
    """Serialize annotations, one per line, with fixed 6-decimal coordinates.

    Round-trips exactly through parse_label_file for coordinates that fit
    in six decimal places (the format's resolution).
    """
    lines = []
    for a in annotations:
        b = a.box
        lines.append(f"{a.class_id} {b.cx:.6f} {b.cy:.6f} {b.w:.6f} {b.h:.6f}\n")
    return "".join(lines)


def parse_prediction_file(text: str, source: str | None = None) -> list[Detection]:
    """Parse detector output text, one ``class cx cy w h confidence`` per line."""
    where = f"{source}: " if source else ""
    detections = []
    for line_no, fields in _parse_object_lines(text, 6, source):
        class_id, box = _parse_box(fields, line_no, where)
        try:
            confidence = float(fields[5])
        except ValueError as exc:
            raise MalformedLineError(f"{where}non-numeric confidence: {exc}", line_no) from exc
        if not 0.0 <= confidence <= 1.0:
            raise OutOfRangeError(f"{where}confidence {confidence} outside [0, 1]", line_no)
        detections.append(Detection(class_id, box, confidence))
    return detections


# ---------------------------------------------------------------------------
# Manifest persistence


def save_manifest(manifest: DatasetManifest, path: Path | str) -> None:
    """Write a manifest as JSON with paths relative to the manifest file."""
    path = Path(path)
    base = path.parent.resolve()

    def rel(p: Path) -> str:
        if p.is_absolute():
            return Path(os.path.relpath(p, base)).as_posix()
        return p.as_posix()

    doc = {
        "taxonomy": manifest.taxonomy.to_json(),
        "notes": list(manifest.notes),
        "records": [
            {
                "image_id": r.image_id,
                "image_path": rel(r.image_path),
                "label_path": rel(r.label_path),
                "group_id": r.group_id,
                "condition": r.condition.value,
                "split": r.split.value,
            }
            for r in manifest.records
        ],
    }
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(doc, indent=2) + "\n", encoding="utf-8")


def load_manifest(path: Path | str) -> DatasetManifest:
    """Read a JSON manifest; relative paths are resolved against its directory."""
    path = Path(path)
    doc = json.loads(path.read_text(encoding="utf-8"))
    base = path.parent.resolve()

    def absolute(raw: str) -> Path:
        p = Path(raw)
        if p.is_absolute():
            return p
        return Path(os.path.normpath(base / p))

    records = [
        ManifestRecord(
            image_id=r["image_id"],
            image_path=absolute(r["image_path"]),
            label_path=absolute(r["label_path"]),
            group_id=r["group_id"],
            condition=WeatherCondition(r["condition"]),
            split=Split(r["split"]),
        )
        for r in doc["records"]
    ]
    return DatasetManifest(
        records=records,
        taxonomy=ClassTaxonomy.from_json(doc["taxonomy"]),
        notes=list(doc.get("notes", [])),
    )


# ---------------------------------------------------------------------------
# Merging


def merge_datasets(
    a: DatasetManifest,
    b: DatasetManifest,
    remap: Mapping[int, int],
    label_out_dir: Path | str,
    prefixes: tuple[str, str] = ("a", "b"),
) -> DatasetManifest:
    """Merge two datasets under ``a``'s taxonomy.

    Image and group ids from both sides are prefixed to stay unique.
    ``remap`` must cover every class id of ``b``'s taxonomy and map into
    ``a``'s taxonomy; ``b``'s label files are rewritten through it into
    ``label_out_dir``. ``a``'s files are referenced unchanged.
    """
    for class_id in b.taxonomy.class_ids():
        if class_id not in remap:
            raise RemapIncompleteError(
                f"class {class_id} ({b.taxonomy.name(class_id)}) has no remap target"
            )
        if remap[class_id] not in a.taxonomy:
            raise RemapIncompleteError(
                f"class {class_id} maps to {remap[class_id]}, "
                f"which is not in the merged taxonomy"
            )

    label_out_dir = Path(label_out_dir)
    label_out_dir.mkdir(parents=True, exist_ok=True)

    merged: list[ManifestRecord] = []
    for record in a.records:
        merged.append(
            replace(record, image_id=f"{prefixes[0]}/{record.image_id}",
                    group_id=f"{prefixes[0]}/{record.group_id}")
        )
    for record in b.records:
        new_id = f"{prefixes[1]}/{record.image_id}"
        annotations = parse_label_file(
            record.label_path.read_text(encoding="utf-8"), source=str(record.label_path)
        )
        rewritten = [replace(ann, class_id=remap[ann.class_id]) for ann in annotations]
        out_path = label_out_dir / f"{safe_stem(new_id)}.txt"
        out_path.write_text(write_label_file(rewritten), encoding="utf-8")
        merged.append(
            replace(record, image_id=new_id, label_path=out_path,
                    group_id=f"{prefixes[1]}/{record.group_id}")
        )

    # DatasetManifest construction re-checks id uniqueness and raises
    # IdCollisionError if prefixing failed to separate the sources.
    return DatasetManifest(
        records=merged,
        taxonomy=a.taxonomy,
        notes=list(a.notes) + list(b.notes) + [f"merged {len(a)} + {len(b)} records"],
    )


# ---------------------------------------------------------------------------
# Grouped split


def _apportion(total: int, ratios: Sequence[float]) -> list[int]:
    """Largest-remainder apportionment; ties go to the earlier entry."""
    quotas = [r * total for r in ratios]
    counts = [int(math.floor(q)) for q in quotas]
    leftover = total - sum(counts)
    order = sorted(range(len(ratios)), key=lambda i: (-(quotas[i] - counts[i]), i))
    for i in order[:leftover]:
        counts[i] += 1
    return counts


def grouped_split(
    manifest: DatasetManifest,
    ratios: tuple[float, float, float] = (0.70, 0.15, 0.15),
    seed: int = 0,
) -> DatasetManifest:
    """Assign train/val/test at the source-group level.

    Whole groups are shuffled deterministically by the seed and allocated
    by largest-remainder apportionment with priority train > val > test,
    so every member of a group lands in the same split and no group can
    leak across partitions. The result is a pure function of
    (group id set, ratios, seed): record order never matters.
    """
    if len(ratios) != 3 or any(r <= 0 for r in ratios):
        raise ValueError(f"ratios must be three positive numbers, got {ratios}")
    if abs(sum(ratios) - 1.0) > 1e-9:
        raise ValueError(f"ratios must sum to 1, got {sum(ratios)}")

    groups = manifest.group_ids()
    stream = SplitMix64(derive_seed(seed, "grouped-split"))
    stream.shuffle(groups)

    n_train, n_val, _ = _apportion(len(groups), ratios)
    assignment: dict[str, Split] = {}
    for i, group in enumerate(groups):
        if i < n_train:
            assignment[group] = Split.TRAIN
        elif i < n_train + n_val:
            assignment[group] = Split.VAL
        else:
            assignment[group] = Split.TEST

    records = [replace(r, split=assignment[r.group_id]) for r in manifest.records]
    return DatasetManifest(records=records, taxonomy=manifest.taxonomy, notes=list(manifest.notes))


# ---------------------------------------------------------------------------
# Validation


@dataclass(frozen=True)
class Violation:
    """One defect found in a manifest. Violations are data, not failures."""

    kind: str  # "missing-file" | "malformed-line" | "out-of-range" | "unknown-class" | "leakage"
    message: str
    image_id: str | None = None
    path: str | None = None
    line: int | None = None
    group_id: str | None = None


def validate_manifest(manifest: DatasetManifest) -> list[Violation]:
    """Check files, labels, class ids, and split integrity.

    Reports missing files, unparsable labels, out-of-range boxes, unknown
    class ids, and any group whose members straddle two assigned splits.
    An empty list means the manifest is valid.
    """
    violations: list[Violation] = []

    for record in manifest.records:
        if not record.image_path.is_file():
            violations.append(Violation(
                kind="missing-file",
                message=f"image file missing: {record.image_path}",
                image_id=record.image_id, path=str(record.image_path),
            ))
        if not record.label_path.is_file():
            violations.append(Violation(
                kind="missing-file",
                message=f"label file missing: {record.label_path}",
                image_id=record.image_id, path=str(record.label_path),
            ))
            continue
        try:
            annotations = parse_label_file(record.label_path.read_text(encoding="utf-8"))
        except MalformedLineError as exc:
            violations.append(Violation(
                kind="malformed-line", message=str(exc),
                image_id=record.image_id, path=str(record.label_path), line=exc.line,
            ))
            continue
        except OutOfRangeError as exc:
            violations.append(Violation(
                kind="out-of-range", message=str(exc),
                image_id=record.image_id, path=str(record.label_path), line=exc.line,
            ))
            continue
        unknown = sorted({a.class_id for a in annotations if a.class_id not in manifest.taxonomy})
        for class_id in unknown:
            violations.append(Violation(
                kind="unknown-class",
                message=f"class id {class_id} not in taxonomy",
                image_id=record.image_id, path=str(record.label_path),
            ))

    splits_per_group: dict[str, set[Split]] = {}
    for record in manifest.records:
        if record.split is not Split.UNASSIGNED:
            splits_per_group.setdefault(record.group_id, set()).add(record.split)
    for group_id in sorted(splits_per_group):
        splits = splits_per_group[group_id]
        if len(splits) > 1:
            names = ", ".join(sorted(s.value for s in splits))
            violations.append(Violation(
                kind="leakage",
                message=f"group {group_id} spans splits: {names}",
                group_id=group_id,
            ))
    return violations
