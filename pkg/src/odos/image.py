"""Grayscale image I/O and intensity utilities.

Conventions shared by the whole package:

* A gray image is a 2-D ``float64`` array of shape ``(height, width)`` with
  finite values, normally inside ``[0, 1]``.  Axis 0 is the row index ``y``
  (increasing downward), axis 1 the column index ``x`` (increasing to the
  right).  Angles are measured counterclockwise from the +x axis.
* A binary mask is a 2-D ``uint8`` array with values in ``{0, 1}``.
* A channel stack is a 3-D ``float64`` array of shape
  ``(channels, height, width)`` whose planes all follow the gray convention.

Intensities stay in 64-bit floats internally; quantization to 8 bits happens
only at file boundaries.  Supported input rasters are 8-bit PNG and binary
PPM/PGM; output is 8-bit grayscale PNG.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np
from PIL import Image

CHANNEL_POLICIES = ("green", "luminance", "as-is-gray")

# Rec. 601 luma weights for the luminance policy.
_LUMA_WEIGHTS = (0.299, 0.587, 0.114)


class ImageFormatError(ValueError):
    """Raised for rasters the pipeline cannot use (mode, bit depth, values)."""


def as_gray(image) -> np.ndarray:
    """Validate and return `image` as a float64 gray plane.

    Accepts anything array-like that is 2-D with finite values.
    """
    arr = np.asarray(image, dtype=np.float64)
    if arr.ndim != 2:
        raise ValueError(f"gray image must be 2-D, got shape {arr.shape}")
    if arr.shape[0] < 1 or arr.shape[1] < 1:
        raise ValueError(f"gray image must be at least 1x1, got {arr.shape}")
    if not np.isfinite(arr).all():
        raise ValueError("gray image contains non-finite values")
    return arr


def as_mask(mask) -> np.ndarray:
    """Validate and return `mask` as a uint8 plane with values in {0, 1}."""
    arr = np.asarray(mask)
    if arr.ndim != 2:
        raise ValueError(f"mask must be 2-D, got shape {arr.shape}")
    vals = np.unique(arr)
    if not np.isin(vals, (0, 1)).all():
        raise ValueError(f"mask values must be exactly 0 or 1, got {vals[:8]}")
    return arr.astype(np.uint8)


def load_image(path: str | Path, channel_policy: str = "green") -> np.ndarray:
    """Load an 8-bit raster as a gray image scaled to [0, 1].

    ``channel_policy`` controls how color input collapses to one plane:
    ``green`` keeps the green plane, ``luminance`` applies Rec. 601 weights,
    and ``as-is-gray`` requires the file to be single-channel already.

    Raises ``OSError`` for unreadable files and ``ImageFormatError`` for
    unsupported modes or bit depths.
    """
    if channel_policy not in CHANNEL_POLICIES:
        raise ValueError(
            f"channel_policy must be one of {CHANNEL_POLICIES}, got {channel_policy!r}"
        )
    with Image.open(path) as img:
        mode = img.mode
        if mode == "P":
            img = img.convert("RGB")
            mode = "RGB"
        elif mode == "LA":
            img = img.convert("L")
            mode = "L"
        if mode == "L":
            plane = np.asarray(img, dtype=np.float64)
            return plane / 255.0
        if mode in ("RGB", "RGBA"):
            if channel_policy == "as-is-gray":
                raise ImageFormatError(
                    f"{path}: color image but channel_policy is 'as-is-gray'"
                )
            rgb = np.asarray(img, dtype=np.float64)[:, :, :3] / 255.0
            if channel_policy == "green":
                return np.ascontiguousarray(rgb[:, :, 1])
            r, g, b = _LUMA_WEIGHTS
            return rgb[:, :, 0] * r + rgb[:, :, 1] * g + rgb[:, :, 2] * b
        raise ImageFormatError(f"{path}: unsupported image mode {mode!r} (8-bit only)")


def save_image(image, path: str | Path) -> None:
    """Write an 8-bit grayscale PNG.

    Real-valued images are clamped to [0, 1] and quantized with
    ``round(v * 255)`` (half rounds up); uint8 masks are written as {0, 255}.
    """
    arr = np.asarray(image)
    if arr.dtype == np.uint8:
        mask = as_mask(arr)
        data = mask * np.uint8(255)
    else:
        gray = as_gray(arr)
        clipped = np.clip(gray, 0.0, 1.0)
        # floor(v*255 + 0.5) so that exact halves round up, independent of
        # the platform's even-rounding.
        data = np.floor(clipped * 255.0 + 0.5).astype(np.uint8)
    Image.fromarray(data, mode="L").save(path)


def load_mask(path: str | Path) -> np.ndarray:
    """Load a grayscale raster and binarize at 0.5 into a {0, 1} mask."""
    gray = load_image(path, channel_policy="as-is-gray")
    return (gray >= 0.5).astype(np.uint8)


def normalize_minmax(image) -> np.ndarray:
    """Affinely rescale intensities into [0, 1]; constant images map to zeros."""
    img = as_gray(image)
    lo = img.min()
    hi = img.max()
    if hi == lo:
        return np.zeros_like(img)
    return (img - lo) / (hi - lo)
