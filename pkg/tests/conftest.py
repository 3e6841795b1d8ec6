"""Shared fixtures: a tiny on-disk dataset builder."""

from __future__ import annotations

import hashlib
from pathlib import Path

import numpy as np
import pytest

from maraug import (
    DatasetManifest,
    ImageBuffer,
    ManifestRecord,
    Split,
    maritime_taxonomy,
    safe_stem,
    save_image,
)

# Label text used for every generated image: one human plus one boat, all
# coordinates exactly representable at six decimals.
DEFAULT_LABEL = "0 0.250000 0.250000 0.200000 0.200000\n1 0.700000 0.700000 0.250000 0.250000\n"


def make_test_image(width: int, height: int, variant: int = 0) -> ImageBuffer:
    """A deterministic gradient image; ``variant`` shifts the pattern."""
    y, x = np.mgrid[0:height, 0:width]
    data = np.empty((height, width, 3), dtype=np.uint8)
    data[..., 0] = (x * 7 + variant * 31) % 256
    data[..., 1] = (y * 13 + variant * 17) % 256
    data[..., 2] = (x * 3 + y * 5 + variant * 11) % 256
    return ImageBuffer(data)


def build_dataset(
    root: Path,
    n_images: int,
    size: tuple[int, int] = (16, 12),
    images_per_group: int = 1,
    label_text: str = DEFAULT_LABEL,
    split: Split = Split.UNASSIGNED,
) -> DatasetManifest:
    """Write ``n_images`` gradient PNGs plus labels under ``root``."""
    image_dir = root / "images"
    label_dir = root / "labels"
    image_dir.mkdir(parents=True, exist_ok=True)
    label_dir.mkdir(parents=True, exist_ok=True)

    records = []
    width, height = size
    for i in range(n_images):
        image_id = f"img_{i:04d}"
        image_path = image_dir / f"{safe_stem(image_id)}.png"
        label_path = label_dir / f"{safe_stem(image_id)}.txt"
        save_image(make_test_image(width, height, variant=i), image_path)
        label_path.write_text(label_text, encoding="utf-8")
        records.append(ManifestRecord(
            image_id=image_id,
            image_path=image_path,
            label_path=label_path,
            group_id=f"g{i // images_per_group:04d}",
            split=split,
        ))
    return DatasetManifest(records=records, taxonomy=maritime_taxonomy())


def tree_digest(root: Path) -> str:
    """Digest of every file under root: relative path plus content bytes."""
    h = hashlib.sha256()
    for path in sorted(root.rglob("*")):
        if path.is_file():
            h.update(path.relative_to(root).as_posix().encode())
            h.update(b"\0")
            h.update(path.read_bytes())
            h.update(b"\0")
    return h.hexdigest()


@pytest.fixture
def dataset_builder(tmp_path):
    def build(n_images: int = 6, **kwargs) -> DatasetManifest:
        return build_dataset(tmp_path / "src", n_images, **kwargs)
    return build
