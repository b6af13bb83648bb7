"""Assembly of multi-channel input stacks for segmentation networks.

The full stack has four planes: the raw image itself (appearance and
illumination), the multi-step fused enhancement (contrast), and the
orientation field (geometry of thin structures).  In ``cos-sin`` mode the
orientation field occupies two planes (remapped unit-vector components);
in ``symbols`` mode it is one scalar-symbol plane and the fourth slot holds
the normalized max-template response of the reference-spacing sweep.

Ablation subsets mirror the full stack plane-for-plane so any plane of a
reduced stack is bit-identical to its counterpart in the full stack.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .filtering import FilterConfig, multi_step, sweep
from .image import as_gray, normalize_minmax
from .vector_field import symbol_encode, theta_map, vector_components

VECTOR_MODES = ("cos-sin", "symbols")
ABLATION_MODES = ("original-only", "multistep-only", "vector-only", "full")


@dataclass(frozen=True)
class ChannelConfig:
    """How to build channel stacks: filter parameters plus encodings."""

    filter: FilterConfig = field(default_factory=FilterConfig)
    vector_mode: str = "cos-sin"
    channel_policy: str = "green"

    def __post_init__(self):
        if self.vector_mode not in VECTOR_MODES:
            raise ValueError(f"vector_mode must be one of {VECTOR_MODES}")
        # channel_policy is validated by the loader at use time

    @property
    def channel_count(self) -> int:
        return 4


def _check_unit_range(raw: np.ndarray) -> np.ndarray:
    if raw.min() < 0.0 or raw.max() > 1.0:
        raise ValueError("raw image must be normalized to [0, 1] before channel assembly")
    return raw


def _vector_planes(raw: np.ndarray, cfg: ChannelConfig) -> list[np.ndarray]:
    tmap = theta_map(raw, cfg.filter)
    if cfg.vector_mode == "cos-sin":
        vx, vy = vector_components(tmap)
        return [vx, vy]
    return [symbol_encode(tmap)]


def build_channels(raw, cfg: ChannelConfig) -> np.ndarray:
    """Assemble the four-plane stack for one [0, 1] gray image.

    Plane order: raw image, multi-step enhancement, then the orientation
    encoding (two unit-vector planes, or symbol plane plus normalized
    reference-sweep max response in ``symbols`` mode).
    """
    img = _check_unit_range(as_gray(raw))
    planes = [img, multi_step(img, cfg.filter)]
    planes.extend(_vector_planes(img, cfg))
    if cfg.vector_mode == "symbols":
        ref = sweep(img, cfg.filter, cfg.filter.reference_spacing)
        planes.append(normalize_minmax(ref.f_max))
    return np.stack(planes)


def ablation_channels(raw, cfg: ChannelConfig, mode: str) -> np.ndarray:
    """Emit the plane subset for one ablation mode.

    ``original-only`` and ``multistep-only`` are single planes; in
    ``cos-sin`` mode ``vector-only`` is the two unit-vector planes (one
    symbol plane in ``symbols`` mode); ``full`` equals ``build_channels``.
    """
    if mode not in ABLATION_MODES:
        raise ValueError(f"ablation mode must be one of {ABLATION_MODES}, got {mode!r}")
    if mode == "full":
        return build_channels(raw, cfg)
    img = _check_unit_range(as_gray(raw))
    if mode == "original-only":
        return np.stack([img])
    if mode == "multistep-only":
        return np.stack([multi_step(img, cfg.filter)])
    return np.stack(_vector_planes(img, cfg))


def ablation_channel_count(cfg: ChannelConfig, mode: str) -> int:
    """Plane count an ablation mode will produce (for dataset headers)."""
    if mode not in ABLATION_MODES:
        raise ValueError(f"ablation mode must be one of {ABLATION_MODES}, got {mode!r}")
    if mode == "full":
        return 4
    if mode == "vector-only":
        return 2 if cfg.vector_mode == "cos-sin" else 1
    return 1
