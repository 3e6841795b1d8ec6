"""Weather condition tests: parameters, rain textures, plans, and runs."""

from __future__ import annotations

import math

import numpy as np
import pytest

from maraug import (
    NON_CLEAR_CONDITIONS,
    AugmentParams,
    AugmentPlan,
    DatasetManifest,
    IdCollisionError,
    ImageBuffer,
    MissingSourceError,
    PlanEntry,
    RgbColor,
    SplitMix64,
    Split,
    WeatherCondition,
    WHITE,
    adjust_brightness,
    adjust_contrast,
    apply_channel_gains,
    apply_condition,
    blend_with_layer,
    derive_seed,
    generate_rain_texture,
    load_image,
    overlay_texture,
    plan_augmentation,
    run_augmentation,
)
from maraug.weathersim import DAY_RAIN_CONTRAST
from conftest import build_dataset, make_test_image, tree_digest


# ---------------------------------------------------------------------------
# Parameters


def test_params_defaults_are_valid():
    params = AugmentParams()
    assert params.fog_alpha == 0.35
    assert params.night_brightness == 0.45
    assert params.sunny_gains == (1.0, 1.0, 0.85)


@pytest.mark.parametrize("kwargs", [
    {"fog_alpha": 1.5},
    {"night_cloud_alpha": -0.1},
    {"sunny_brightness": -1.0},
    {"rain_streak_value": 256},
    {"rain_len_range": (10.0, 5.0)},
    {"rain_alpha_range": (0.2, 1.5)},
    {"rain_angle_deg": (15.0, -1.0)},
    {"night_gains": (0.5, -0.5, 1.0)},
])
def test_params_validation(kwargs):
    with pytest.raises(ValueError):
        AugmentParams(**kwargs)


def test_params_file_round_trip(tmp_path):
    params = AugmentParams(fog_alpha=0.5, rain_len_range=(4.0, 9.0))
    path = tmp_path / "params.json"
    params.to_file(path)
    assert AugmentParams.from_file(path) == params


def test_params_rejects_unknown_keys():
    with pytest.raises(ValueError, match="unknown augment parameter"):
        AugmentParams.from_dict({"fog_alpha": 0.2, "fog_strength": 1.0})


# ---------------------------------------------------------------------------
# Rain texture


def test_rain_texture_zero_density_is_empty():
    tex = generate_rain_texture(32, 24, seed=9, params=AugmentParams(rain_density=0.0))
    assert not tex.alpha.any()


def test_rain_texture_determinism_and_seed_sensitivity():
    # density 25 on 40x30 -> three streaks
    params = AugmentParams(rain_density=25.0)
    a = generate_rain_texture(40, 30, seed=5, params=params)
    b = generate_rain_texture(40, 30, seed=5, params=params)
    c = generate_rain_texture(40, 30, seed=6, params=params)
    assert a.alpha.any()
    assert np.array_equal(a.alpha, b.alpha)
    assert not np.array_equal(a.alpha, c.alpha)


def test_rain_texture_respects_parameter_ranges():
    params = AugmentParams(rain_alpha_range=(0.3, 0.4), rain_streak_value=200,
                           rain_density=10.0)
    tex = generate_rain_texture(64, 64, seed=12, params=params)
    assert tex.value == 200
    covered = tex.alpha[tex.alpha > 0]
    assert covered.size > 0
    assert np.all((covered >= 0.3) & (covered <= 0.4))


def test_rain_texture_streak_count_scales_with_density():
    # 100x100 at density 1.0 is exactly one streak, so its pixels all
    # share one alpha; density 3.0 gives three streaks.
    one = generate_rain_texture(100, 100, seed=3, params=AugmentParams(rain_density=1.0))
    assert len(np.unique(one.alpha[one.alpha > 0])) == 1
    three = generate_rain_texture(100, 100, seed=3, params=AugmentParams(rain_density=3.0))
    assert 1 <= len(np.unique(three.alpha[three.alpha > 0])) <= 3


def dda_reference(width: int, height: int, seed: int, params: AugmentParams):
    """Pure-Python replay of the documented draw order and stepping rule.

    Draws per streak (origin x, origin y, angle, length, alpha) from one
    splitmix64 stream, then walks round(length) unit steps along the major
    axis, flooring to a cell and keeping the max alpha on overlap.
    """
    stream = SplitMix64(seed)
    count = round(params.rain_density * width * height / 10_000.0 + 1e-12)
    cells: dict[tuple[int, int], float] = {}
    angle_mean, angle_jitter = params.rain_angle_deg
    for _ in range(count):
        x0 = stream.uniform(0.0, float(width))
        y0 = stream.uniform(0.0, float(height))
        angle = math.radians(angle_mean + stream.uniform(-angle_jitter, angle_jitter))
        length = stream.uniform(*params.rain_len_range)
        alpha = stream.uniform(*params.rain_alpha_range)
        dx, dy = math.sin(angle), math.cos(angle)
        major = max(abs(dx), abs(dy))
        steps = max(1, math.floor(abs(length)) + (1 if abs(length) % 1 >= 0.5 else 0))
        for i in range(steps):
            col = math.floor(x0 + i * (dx / major))
            row = math.floor(y0 + i * (dy / major))
            if 0 <= col < width and 0 <= row < height:
                key = (row, col)
                cells[key] = max(cells.get(key, 0.0), alpha)
    return cells


@pytest.mark.parametrize("seed", [0, 1, 7, 99])
def test_rain_texture_matches_python_dda_replay(seed):
    params = AugmentParams(rain_density=2.0)
    tex = generate_rain_texture(50, 40, seed=seed, params=params)
    expected = dda_reference(50, 40, seed, params)
    got = {
        (r, c): tex.alpha[r, c]
        for r, c in zip(*np.nonzero(tex.alpha))
    }
    assert set(got) == set(expected)
    for key, alpha in expected.items():
        assert got[key] == pytest.approx(alpha, abs=0.0)


def test_rain_texture_rejects_bad_dimensions():
    with pytest.raises(ValueError):
        generate_rain_texture(0, 10, seed=1, params=AugmentParams())


# ---------------------------------------------------------------------------
# Conditions


def test_day_clear_is_identity_copy():
    img = make_test_image(10, 8)
    out = apply_condition(img, WeatherCondition.DAY_CLEAR, seed=1)
    assert out == img
    assert out.data is not img.data


def test_night_clear_worked_example():
    img = ImageBuffer.filled(4, 3, RgbColor(200, 200, 200))
    out = apply_condition(img, WeatherCondition.NIGHT_CLEAR, seed=1)
    assert out.pixel(0, 0) == (83, 88, 98)


def test_day_cloudy_worked_example():
    img = ImageBuffer.filled(4, 3, RgbColor(255, 255, 255))
    out = apply_condition(img, WeatherCondition.DAY_CLOUDY, seed=1)
    assert out.pixel(0, 0) == (242, 242, 242)


def test_day_sunny_composition():
    img = make_test_image(12, 9, variant=4)
    params = AugmentParams()
    expected = apply_channel_gains(
        adjust_brightness(img, params.sunny_brightness), params.sunny_gains)
    assert apply_condition(img, WeatherCondition.DAY_SUNNY, seed=1, params=params) == expected


def test_day_rain_composition():
    img = make_test_image(12, 9, variant=6)
    params = AugmentParams()
    seed = 77
    texture = generate_rain_texture(12, 9, derive_seed(seed, "rain-texture"), params)
    expected = overlay_texture(adjust_contrast(img, DAY_RAIN_CONTRAST), texture)
    assert apply_condition(img, WeatherCondition.DAY_RAIN, seed=seed, params=params) == expected


def test_night_variants_composition():
    img = make_test_image(12, 9, variant=8)
    params = AugmentParams()
    seed = 13
    night = apply_channel_gains(
        adjust_contrast(adjust_brightness(img, params.night_brightness),
                        params.night_contrast),
        params.night_gains)
    assert apply_condition(img, WeatherCondition.NIGHT_CLEAR, seed=seed) == night

    texture = generate_rain_texture(12, 9, derive_seed(seed, "rain-texture"), params)
    assert apply_condition(img, WeatherCondition.NIGHT_RAIN, seed=seed) == \
        overlay_texture(night, texture)
    assert apply_condition(img, WeatherCondition.NIGHT_CLOUDY, seed=seed) == \
        blend_with_layer(night, WHITE, params.night_cloud_alpha)


# ---------------------------------------------------------------------------
# Planning


def test_plan_covers_every_source_once(dataset_builder):
    manifest = dataset_builder(n_images=25)
    plan = plan_augmentation(manifest, seed=42)
    assert len(plan) == 25
    assert sorted(e.source_image_id for e in plan.entries) == \
        sorted(r.image_id for r in manifest.records)


def test_plan_condition_counts_within_one(dataset_builder):
    manifest = dataset_builder(n_images=26)
    plan = plan_augmentation(manifest, seed=0)
    counts = plan.condition_counts()
    assert set(counts) == set(NON_CLEAR_CONDITIONS)
    assert sum(counts.values()) == 26
    assert max(counts.values()) - min(counts.values()) <= 1


def test_plan_seeds_derive_from_image_id(dataset_builder):
    manifest = dataset_builder(n_images=4)
    plan = plan_augmentation(manifest, seed=9)
    for entry in plan.entries:
        assert entry.seed == derive_seed(9, f"image:{entry.source_image_id}")


def test_plan_is_deterministic_and_seed_sensitive(dataset_builder):
    manifest = dataset_builder(n_images=30)
    a = plan_augmentation(manifest, seed=1)
    b = plan_augmentation(manifest, seed=1)
    assert a.entries == b.entries
    c = plan_augmentation(manifest, seed=2)
    assert {e.source_image_id: e.condition for e in a.entries} != \
        {e.source_image_id: e.condition for e in c.entries}


def test_plan_rejects_non_clear_sources(dataset_builder):
    from dataclasses import replace

    manifest = dataset_builder(n_images=2)
    tainted = DatasetManifest(
        records=[manifest.records[0],
                 replace(manifest.records[1], condition=WeatherCondition.NIGHT_RAIN)],
        taxonomy=manifest.taxonomy)
    with pytest.raises(ValueError, match="day-clear"):
        plan_augmentation(tainted, seed=1)


def test_plan_rejects_duplicate_sources():
    entry = PlanEntry("x", WeatherCondition.DAY_RAIN, 1)
    with pytest.raises(ValueError):
        AugmentPlan(entries=[entry, entry])


def test_empty_manifest_gives_empty_plan():
    manifest = DatasetManifest(records=[], taxonomy=__import__("maraug").maritime_taxonomy())
    assert len(plan_augmentation(manifest, seed=1)) == 0


# ---------------------------------------------------------------------------
# Running


def test_run_augmentation_writes_variants(dataset_builder, tmp_path):
    manifest = dataset_builder(n_images=6)
    plan = plan_augmentation(manifest, seed=42)
    out = tmp_path / "aug"
    result = run_augmentation(manifest, plan, AugmentParams(), out)

    assert len(result) == 12
    assert result.records[:6] == manifest.records
    originals = manifest.by_id()
    # Variants are appended in plan order.
    for entry, variant in zip(plan.entries, result.records[6:]):
        original = originals[entry.source_image_id]
        assert variant.image_id == f"{original.image_id}__{entry.condition.value}"
        assert variant.condition == entry.condition
        assert variant.group_id == original.group_id
        assert variant.split is Split.UNASSIGNED
        assert variant.image_path.is_file()
        assert variant.label_path.read_bytes() == original.label_path.read_bytes()
        written = load_image(variant.image_path)
        expected = apply_condition(load_image(original.image_path),
                                   entry.condition, entry.seed)
        assert written == expected
    assert any("augmented: 6 synthetic variants" in note for note in result.notes)


def test_run_augmentation_worker_count_never_changes_bytes(dataset_builder, tmp_path):
    manifest = dataset_builder(n_images=8)
    plan = plan_augmentation(manifest, seed=7)
    digests = set()
    for workers in (1, 3):
        out = tmp_path / f"w{workers}"
        run_augmentation(manifest, plan, AugmentParams(), out, workers=workers)
        digests.add(tree_digest(out))
    assert len(digests) == 1


def test_run_augmentation_missing_plan_source(dataset_builder, tmp_path):
    manifest = dataset_builder(n_images=2)
    plan = AugmentPlan(entries=[PlanEntry("ghost", WeatherCondition.DAY_SUNNY, 1)])
    with pytest.raises(MissingSourceError, match="ghost"):
        run_augmentation(manifest, plan, AugmentParams(), tmp_path / "o")


def test_run_augmentation_missing_source_file(dataset_builder, tmp_path):
    manifest = dataset_builder(n_images=2)
    manifest.records[0].image_path.unlink()
    plan = plan_augmentation(manifest, seed=1)
    with pytest.raises(MissingSourceError):
        run_augmentation(manifest, plan, AugmentParams(), tmp_path / "o")


def test_run_augmentation_detects_stem_collisions(tmp_path):
    from maraug import ManifestRecord, maritime_taxonomy, save_image

    root = tmp_path / "src"
    root.mkdir()
    records = []
    for image_id in ("a b", "a_b"):  # both sanitize to "a_b"
        stem = image_id.replace(" ", "-")
        image_path = root / f"{stem}.png"
        label_path = root / f"{stem}.txt"
        save_image(make_test_image(4, 4), image_path)
        label_path.write_text("0 0.5 0.5 0.1 0.1\n")
        records.append(ManifestRecord(image_id, image_path, label_path, "g0"))
    manifest = DatasetManifest(records=records, taxonomy=maritime_taxonomy())
    plan = AugmentPlan(entries=[
        PlanEntry("a b", WeatherCondition.DAY_SUNNY, 1),
        PlanEntry("a_b", WeatherCondition.DAY_SUNNY, 2),
    ])
    with pytest.raises(IdCollisionError):
        run_augmentation(manifest, plan, AugmentParams(), tmp_path / "o")
