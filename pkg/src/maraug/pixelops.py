"""Deterministic pixel-level primitives on 8-bit RGB images.

All five operations follow the same scheme: arithmetic in float64,
quantized to 8-bit once at the end with half-away-from-zero rounding and
a clamp to [0, 255]. Given identical inputs they produce byte-identical
outputs on every platform.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from PIL import Image

from .errors import DecodeFailureError, DimensionMismatchError, WriteFailureError

__all__ = [
    "ImageBuffer",
    "RgbColor",
    "AlphaTexture",
    "round_half_away_from_zero",
    "blend_with_layer",
    "adjust_brightness",
    "adjust_contrast",
    "apply_channel_gains",
    "overlay_texture",
    "load_image",
    "save_image",
]


def round_half_away_from_zero(x: float) -> int:
    """Round a scalar half away from zero (round(2.5) = 3, round(-2.5) = -3).

    The fractional part is compared to 0.5 directly; mag - floor(mag) is
    exact in binary64, so no input misrounds the way floor(x + 0.5) does
    just below a half boundary.
    """
    mag = abs(x)
    base = math.floor(mag)
    if mag - base >= 0.5:
        base += 1
    return base if x >= 0 else -base


def _quantize(values: np.ndarray) -> np.ndarray:
    """Round half away from zero, clamp to [0, 255], return uint8.

    Consumes ``values``; callers always pass a freshly computed float64
    temporary, so the buffers are reused instead of reallocated.
    """
    mag = np.abs(values)
    base = np.floor(mag)
    np.subtract(mag, base, out=mag)  # fractional part, exact in binary64
    base += mag >= 0.5
    np.copysign(base, values, out=base)
    np.clip(base, 0.0, 255.0, out=base)
    return base.astype(np.uint8)


class ImageBuffer:
    """Owned 8-bit RGB raster with value semantics.

    ``data`` is a (height, width, 3) uint8 array, row-major. Operations
    never mutate their input; they return fresh buffers.
    """

    __slots__ = ("data",)

    def __init__(self, data: np.ndarray):
        if data.ndim != 3 or data.shape[2] != 3:
            raise ValueError(f"expected (height, width, 3) array, got shape {data.shape}")
        if data.dtype != np.uint8:
            raise ValueError(f"expected uint8 data, got {data.dtype}")
        if data.shape[0] < 1 or data.shape[1] < 1:
            raise ValueError("image dimensions must be positive")
        self.data = data

    @property
    def width(self) -> int:
        return self.data.shape[1]

    @property
    def height(self) -> int:
        return self.data.shape[0]

    @classmethod
    def from_array(cls, array: np.ndarray) -> "ImageBuffer":
        """Build a buffer from any array-like, copying the data."""
        return cls(np.ascontiguousarray(array, dtype=np.uint8).copy())

    @classmethod
    def filled(cls, width: int, height: int, color: "RgbColor") -> "ImageBuffer":
        data = np.empty((height, width, 3), dtype=np.uint8)
        data[..., 0] = color.r
        data[..., 1] = color.g
        data[..., 2] = color.b
        return cls(data)

    def copy(self) -> "ImageBuffer":
        return ImageBuffer(self.data.copy())

    def pixel(self, x: int, y: int) -> tuple[int, int, int]:
        r, g, b = self.data[y, x]
        return int(r), int(g), int(b)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, ImageBuffer):
            return NotImplemented
        return self.data.shape == other.data.shape and bool(np.array_equal(self.data, other.data))

    def __repr__(self) -> str:
        return f"ImageBuffer({self.width}x{self.height})"


@dataclass(frozen=True)
class RgbColor:
    """An 8-bit RGB color, used for blend layers."""

    r: int
    g: int
    b: int

    def __post_init__(self):
        for name in ("r", "g", "b"):
            value = getattr(self, name)
            if not 0 <= value <= 255:
                raise ValueError(f"channel {name}={value} outside [0, 255]")


WHITE = RgbColor(255, 255, 255)


@dataclass
class AlphaTexture:
    """Per-pixel coverage mask plus the gray level painted where covered.

    ``alpha`` is a (height, width) float array with entries in [0, 1];
    ``value`` is the 8-bit gray level drawn wherever alpha > 0.
    """

    width: int
    height: int
    alpha: np.ndarray = field(repr=False)
    value: int = 220

    def __post_init__(self):
        if self.width < 1 or self.height < 1:
            raise ValueError("texture dimensions must be positive")
        if self.alpha.shape != (self.height, self.width):
            raise ValueError(
                f"alpha shape {self.alpha.shape} does not match {self.height}x{self.width}"
            )
        if not 0 <= self.value <= 255:
            raise ValueError(f"value={self.value} outside [0, 255]")
        lo = float(self.alpha.min(initial=0.0))
        hi = float(self.alpha.max(initial=0.0))
        if lo < 0.0 or hi > 1.0:
            raise ValueError(f"alpha values outside [0, 1]: min={lo}, max={hi}")

    @classmethod
    def zeros(cls, width: int, height: int, value: int = 220) -> "AlphaTexture":
        return cls(width=width, height=height, alpha=np.zeros((height, width)), value=value)


def blend_with_layer(img: ImageBuffer, layer: RgbColor, alpha: float) -> ImageBuffer:
    """Blend a solid color over the image: out = (1-alpha)*in + alpha*layer."""
    if not 0.0 <= alpha <= 1.0:
        raise ValueError(f"alpha={alpha} outside [0, 1]")
    source = img.data.astype(np.float64)
    layer_vec = np.array([layer.r, layer.g, layer.b], dtype=np.float64)
    # In-place evaluation of (1-alpha)*in + alpha*layer, same float64 values.
    source *= 1.0 - alpha
    source += alpha * layer_vec
    return ImageBuffer(_quantize(source))


def adjust_brightness(img: ImageBuffer, factor: float) -> ImageBuffer:
    """Scale every channel: out = in * factor."""
    if factor < 0.0:
        raise ValueError(f"factor={factor} must be nonnegative")
    source = img.data.astype(np.float64)
    source *= factor
    return ImageBuffer(_quantize(source))


def adjust_contrast(img: ImageBuffer, factor: float) -> ImageBuffer:
    """Stretch channels about mid-gray: out = (in - 128)*factor + 128."""
    if factor < 0.0:
        raise ValueError(f"factor={factor} must be nonnegative")
    source = img.data.astype(np.float64)
    source -= 128.0
    source *= factor
    source += 128.0
    return ImageBuffer(_quantize(source))


def apply_channel_gains(img: ImageBuffer, gains: tuple[float, float, float]) -> ImageBuffer:
    """Scale R, G, B independently: out_c = in_c * gain_c."""
    if len(gains) != 3:
        raise ValueError("gains must have exactly three entries")
    if any(g < 0.0 for g in gains):
        raise ValueError(f"gains={gains} must be nonnegative")
    gain_vec = np.array(gains, dtype=np.float64)
    source = img.data.astype(np.float64)
    source *= gain_vec
    return ImageBuffer(_quantize(source))


def overlay_texture(img: ImageBuffer, tex: AlphaTexture) -> ImageBuffer:
    """Composite a gray texture over the image by per-pixel alpha."""
    if (tex.width, tex.height) != (img.width, img.height):
        raise DimensionMismatchError(
            f"texture is {tex.width}x{tex.height}, image is {img.width}x{img.height}"
        )
    source = img.data.astype(np.float64)
    alpha = tex.alpha[:, :, np.newaxis]
    # In-place evaluation of (1-alpha)*in + alpha*value, same float64 values.
    source *= 1.0 - alpha
    source += alpha * float(tex.value)
    return ImageBuffer(_quantize(source))


def load_image(path: Path | str) -> ImageBuffer:
    """Load a PNG or JPEG file as an RGB buffer."""
    path = Path(path)
    if not path.is_file():
        raise DecodeFailureError(f"image file not found: {path}")
    try:
        with Image.open(path) as im:
            rgb = im.convert("RGB")
            data = np.asarray(rgb, dtype=np.uint8)
    except DecodeFailureError:
        raise
    except Exception as exc:
        raise DecodeFailureError(f"cannot decode {path}: {exc}") from exc
    return ImageBuffer(data.copy())


def save_image(img: ImageBuffer, path: Path | str) -> None:
    """Write the buffer to disk; format chosen by extension (.png/.jpg)."""
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        pil = Image.fromarray(img.data, mode="RGB")
        if path.suffix.lower() == ".png":
            # Low zlib effort: ~4x faster encodes for modestly larger files,
            # and still byte-deterministic for identical pixel input.
            pil.save(path, compress_level=1)
        else:
            pil.save(path)
    except Exception as exc:
        raise WriteFailureError(f"cannot write {path}: {exc}") from exc
