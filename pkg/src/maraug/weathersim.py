"""Synthetic weather and lighting conditions for aerial imagery.

Each condition is a fixed composition of the pixel primitives:

* day-clear    — identity (the original image).
* day-sunny    — brightness boost, then a warm tint (blue channel attenuated).
* day-cloudy   — white-layer blend, then a mild contrast cut.
* day-rain     — slight contrast cut, then a rain-streak overlay.
* night-clear  — brightness and contrast cut, then a cool tint
                 (red/green attenuated).
* night-rain   — night-clear, then the rain overlay.
* night-cloudy — night-clear, then a white-layer blend.

All magnitudes live in AugmentParams and are configurable from a JSON
file; the defaults here are the toolkit's pinned reference values.
Everything is deterministic: rain textures come from a splitmix64 stream
and per-image seeds are derived from (global seed, image id), never from
execution order, so outputs are byte-identical for any worker count.
"""

from __future__ import annotations

import json
import math
import shutil
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass
from pathlib import Path

import numpy as np

from .conditions import NON_CLEAR_CONDITIONS, WeatherCondition
from .datasetio import DatasetManifest, ManifestRecord, Split, safe_stem
from .errors import IdCollisionError, MissingSourceError, WriteFailureError
from .pixelops import (
    WHITE,
    AlphaTexture,
    ImageBuffer,
    adjust_brightness,
    adjust_contrast,
    apply_channel_gains,
    blend_with_layer,
    load_image,
    overlay_texture,
    round_half_away_from_zero,
    save_image,
)
from .rng import SplitMix64, derive_seed

__all__ = [
    "AugmentParams",
    "PlanEntry",
    "AugmentPlan",
    "generate_rain_texture",
    "apply_condition",
    "plan_augmentation",
    "run_augmentation",
    "DAY_RAIN_CONTRAST",
]

# Contrast cut applied before the rain overlay in the day-rain condition.
DAY_RAIN_CONTRAST = 0.95


@dataclass(frozen=True)
class AugmentParams:
    """All transform magnitudes for the seven conditions.

    Ranges are (min, max); rain_angle_deg is (mean, jitter) measured from
    vertical; rain_density is streaks per 10^4 pixels.
    """

    fog_alpha: float = 0.35
    fog_contrast: float = 0.90
    sunny_brightness: float = 1.25
    sunny_gains: tuple[float, float, float] = (1.0, 1.0, 0.85)
    rain_density: float = 1.0
    rain_streak_value: int = 220
    rain_len_range: tuple[float, float] = (8.0, 24.0)
    rain_angle_deg: tuple[float, float] = (15.0, 5.0)
    rain_alpha_range: tuple[float, float] = (0.2, 0.5)
    night_brightness: float = 0.45
    night_contrast: float = 0.80
    night_gains: tuple[float, float, float] = (0.85, 0.90, 1.0)
    night_cloud_alpha: float = 0.25

    def __post_init__(self):
        for name in ("fog_alpha", "night_cloud_alpha"):
            value = getattr(self, name)
            if not 0.0 <= value <= 1.0:
                raise ValueError(f"{name}={value} outside [0, 1]")
        for name in ("fog_contrast", "sunny_brightness", "rain_density",
                     "night_brightness", "night_contrast"):
            if getattr(self, name) < 0.0:
                raise ValueError(f"{name} must be nonnegative")
        for name in ("sunny_gains", "night_gains"):
            if any(g < 0.0 for g in getattr(self, name)):
                raise ValueError(f"{name} must be nonnegative")
        if not 0 <= self.rain_streak_value <= 255:
            raise ValueError(f"rain_streak_value={self.rain_streak_value} outside [0, 255]")
        for name in ("rain_len_range", "rain_alpha_range"):
            lo, hi = getattr(self, name)
            if lo > hi:
                raise ValueError(f"{name} must be ordered min <= max")
        lo, hi = self.rain_alpha_range
        if lo < 0.0 or hi > 1.0:
            raise ValueError(f"rain_alpha_range={self.rain_alpha_range} outside [0, 1]")
        if self.rain_len_range[0] < 0.0:
            raise ValueError("rain lengths must be nonnegative")
        if self.rain_angle_deg[1] < 0.0:
            raise ValueError("rain angle jitter must be nonnegative")

    def to_dict(self) -> dict:
        raw = asdict(self)
        return {k: list(v) if isinstance(v, tuple) else v for k, v in raw.items()}

    @classmethod
    def from_dict(cls, data: dict) -> "AugmentParams":
        known = set(cls.__dataclass_fields__)
        unknown = set(data) - known
        if unknown:
            raise ValueError(f"unknown augment parameter(s): {sorted(unknown)}")
        coerced = {k: tuple(v) if isinstance(v, list) else v for k, v in data.items()}
        return cls(**coerced)

    def to_file(self, path: Path | str) -> None:
        Path(path).write_text(json.dumps(self.to_dict(), indent=2) + "\n", encoding="utf-8")

    @classmethod
    def from_file(cls, path: Path | str) -> "AugmentParams":
        return cls.from_dict(json.loads(Path(path).read_text(encoding="utf-8")))


@dataclass(frozen=True)
class PlanEntry:
    source_image_id: str
    condition: WeatherCondition
    seed: int


@dataclass
class AugmentPlan:
    """One synthetic variant per source image, with its derived seed."""

    entries: list[PlanEntry]

    def __post_init__(self):
        sources = [e.source_image_id for e in self.entries]
        if len(set(sources)) != len(sources):
            raise ValueError("plan assigns more than one variant to a source image")

    def __len__(self) -> int:
        return len(self.entries)

    def condition_counts(self) -> dict[WeatherCondition, int]:
        counts = {c: 0 for c in NON_CLEAR_CONDITIONS}
        for entry in self.entries:
            counts[entry.condition] = counts.get(entry.condition, 0) + 1
        return counts


def generate_rain_texture(
    width: int, height: int, seed: int, params: AugmentParams
) -> AlphaTexture:
    """Draw seeded rain streaks as an alpha texture.

    The streak count is round(density * width * height / 10^4). Per
    streak, origin x/y, angle, length, and alpha are drawn in that order
    from one splitmix64 stream. A streak is rasterized one pixel thick by
    stepping its major axis one pixel at a time for round(length) steps;
    pixels outside the image are dropped and overlaps keep the larger
    alpha. Fixed (width, height, seed, params) always give the same texture.
    """
    if width < 1 or height < 1:
        raise ValueError("texture dimensions must be positive")
    stream = SplitMix64(seed)
    count = round_half_away_from_zero(params.rain_density * width * height / 10_000.0)
    alpha = np.zeros((height, width))
    angle_mean, angle_jitter = params.rain_angle_deg
    len_lo, len_hi = params.rain_len_range
    alpha_lo, alpha_hi = params.rain_alpha_range
    for _ in range(count):
        x0 = stream.uniform(0.0, float(width))
        y0 = stream.uniform(0.0, float(height))
        angle = math.radians(angle_mean + stream.uniform(-angle_jitter, angle_jitter))
        length = stream.uniform(len_lo, len_hi)
        streak_alpha = stream.uniform(alpha_lo, alpha_hi)

        dx, dy = math.sin(angle), math.cos(angle)
        major = max(abs(dx), abs(dy))
        steps = max(1, round_half_away_from_zero(length))
        i = np.arange(steps)
        cols = np.floor(x0 + i * (dx / major)).astype(np.int64)
        rows = np.floor(y0 + i * (dy / major)).astype(np.int64)
        keep = (cols >= 0) & (cols < width) & (rows >= 0) & (rows < height)
        np.maximum.at(alpha, (rows[keep], cols[keep]), streak_alpha)
    return AlphaTexture(width=width, height=height, alpha=alpha, value=params.rain_streak_value)


def _rain_overlay(img: ImageBuffer, seed: int, params: AugmentParams) -> ImageBuffer:
    texture = generate_rain_texture(img.width, img.height, derive_seed(seed, "rain-texture"), params)
    return overlay_texture(img, texture)


def _night_base(img: ImageBuffer, params: AugmentParams) -> ImageBuffer:
    out = adjust_brightness(img, params.night_brightness)
    out = adjust_contrast(out, params.night_contrast)
    return apply_channel_gains(out, params.night_gains)


def apply_condition(
    img: ImageBuffer, cond: WeatherCondition, seed: int,
    params: AugmentParams | None = None,
) -> ImageBuffer:
    """Apply one weather/lighting condition with its fixed composition order."""
    if params is None:
        params = AugmentParams()
    if cond is WeatherCondition.DAY_CLEAR:
        return img.copy()
    if cond is WeatherCondition.DAY_SUNNY:
        return apply_channel_gains(adjust_brightness(img, params.sunny_brightness), params.sunny_gains)
    if cond is WeatherCondition.DAY_CLOUDY:
        return adjust_contrast(blend_with_layer(img, WHITE, params.fog_alpha), params.fog_contrast)
    if cond is WeatherCondition.DAY_RAIN:
        return _rain_overlay(adjust_contrast(img, DAY_RAIN_CONTRAST), seed, params)
    if cond is WeatherCondition.NIGHT_CLEAR:
        return _night_base(img, params)
    if cond is WeatherCondition.NIGHT_RAIN:
        return _rain_overlay(_night_base(img, params), seed, params)
    if cond is WeatherCondition.NIGHT_CLOUDY:
        return blend_with_layer(_night_base(img, params), WHITE, params.night_cloud_alpha)
    raise ValueError(f"unhandled condition: {cond}")


def plan_augmentation(manifest: DatasetManifest, seed: int) -> AugmentPlan:
    """Assign each source image exactly one non-clear variant.

    Source ids are shuffled deterministically by the seed, then the six
    synthetic conditions are dealt out cyclically, so per-condition counts
    differ by at most one. Adding the variants to the originals doubles
    the dataset, leaving the clear condition at exactly half. An empty
    manifest yields an empty plan.
    """
    for record in manifest.records:
        if record.condition is not WeatherCondition.DAY_CLEAR:
            raise ValueError(
                f"manifest must contain only original day-clear images; "
                f"{record.image_id} is {record.condition.value}"
            )
    ids = sorted(record.image_id for record in manifest.records)
    SplitMix64(derive_seed(seed, "augment-plan")).shuffle(ids)
    entries = [
        PlanEntry(
            source_image_id=image_id,
            condition=NON_CLEAR_CONDITIONS[i % len(NON_CLEAR_CONDITIONS)],
            seed=derive_seed(seed, f"image:{image_id}"),
        )
        for i, image_id in enumerate(ids)
    ]
    return AugmentPlan(entries=entries)


def _augment_one(
    record: ManifestRecord,
    entry: PlanEntry,
    params: AugmentParams,
    variant_id: str,
    image_path: Path,
    label_path: Path,
) -> ManifestRecord:
    if not record.image_path.is_file():
        raise MissingSourceError(f"source image missing: {record.image_path}")
    if not record.label_path.is_file():
        raise MissingSourceError(f"source label missing: {record.label_path}")
    img = load_image(record.image_path)
    out = apply_condition(img, entry.condition, entry.seed, params)
    save_image(out, image_path)
    try:
        # Photometric transforms leave geometry untouched: the label file
        # is copied byte for byte.
        shutil.copyfile(record.label_path, label_path)
    except OSError as exc:
        raise WriteFailureError(f"cannot write {label_path}: {exc}") from exc
    return ManifestRecord(
        image_id=variant_id,
        image_path=image_path,
        label_path=label_path,
        group_id=record.group_id,
        condition=entry.condition,
        split=Split.UNASSIGNED,
    )


def run_augmentation(
    manifest: DatasetManifest,
    plan: AugmentPlan,
    params: AugmentParams,
    out_dir: Path | str,
    workers: int = 1,
) -> DatasetManifest:
    """Materialize a plan: write variant images and labels under out_dir.

    Variant images are always written as PNG. Each variant keeps its
    source's group id so the grouped split can never separate them. The
    output bytes depend only on (manifest, plan, params), not on the
    worker count.
    """
    out_dir = Path(out_dir)
    image_dir = out_dir / "images"
    label_dir = out_dir / "labels"
    image_dir.mkdir(parents=True, exist_ok=True)
    label_dir.mkdir(parents=True, exist_ok=True)

    by_id = manifest.by_id()
    jobs = []
    stems: dict[str, str] = {}
    for entry in plan.entries:
        record = by_id.get(entry.source_image_id)
        if record is None:
            raise MissingSourceError(f"plan references unknown image id: {entry.source_image_id}")
        variant_id = f"{entry.source_image_id}__{entry.condition.value}"
        stem = safe_stem(variant_id)
        if stem in stems:
            raise IdCollisionError(
                f"variant ids {stems[stem]!r} and {variant_id!r} collide as filename {stem!r}"
            )
        stems[stem] = variant_id
        jobs.append((record, entry, variant_id,
                     image_dir / f"{stem}.png", label_dir / f"{stem}.txt"))

    def run(job) -> ManifestRecord:
        record, entry, variant_id, image_path, label_path = job
        return _augment_one(record, entry, params, variant_id, image_path, label_path)

    if workers <= 1:
        variants = [run(job) for job in jobs]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            # map() yields in submission order, so the first failure raised
            # is the first failing file in plan order.
            variants = list(pool.map(run, jobs))

    return DatasetManifest(
        records=list(manifest.records) + variants,
        taxonomy=manifest.taxonomy,
        notes=list(manifest.notes) + [f"augmented: {len(variants)} synthetic variants"],
    )
