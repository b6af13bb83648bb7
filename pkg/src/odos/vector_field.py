"""Per-pixel orientation maps and their channel encodings.

The orientation map records, per pixel, the 1-based index of the quantized
angle winning the max template (``ABSENT`` where no orientation response is
positive).  Two encodings turn it into network-ready planes:

* ``vector_components``: the unit vector (cos t, sin t), zero vector for
  absent pixels, each component remapped from [-1, 1] to [0, 1].  Absent
  therefore stores the pair (0.5, 0.5); a 90-degree pixel legitimately
  stores 0.5 in the cosine plane alone, so consumers must read the pair.
* ``symbol_encode``: one scalar symbol per direction, index / 2(L-1) in
  (0, 1], with 0 for absent pixels.  One plane instead of two.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .filtering import ABSENT, FilterConfig, sweep
from .image import as_gray
from .sticks import orientation_angle, orientation_count


@dataclass
class ThetaMap:
    """Winning-orientation indices for one sweep (0 encodes absent)."""

    indices: np.ndarray  # int32, values in {ABSENT} | 1..2(L-1)
    length_L: int
    spacing_S: int

    def __post_init__(self):
        n = orientation_count(self.length_L)
        idx = np.asarray(self.indices)
        if idx.ndim != 2:
            raise ValueError(f"orientation map must be 2-D, got {idx.shape}")
        if idx.min() < 0 or idx.max() > n:
            raise ValueError(f"orientation indices must lie in 0..{n}")
        self.indices = idx.astype(np.int32)

    @property
    def orientation_total(self) -> int:
        return orientation_count(self.length_L)


def theta_map(image, config: FilterConfig, spacing_S: int | None = None) -> ThetaMap:
    """Winning-orientation map of one sweep of ``image``.

    Defaults to the smallest configured spacing; the orientation field is
    always computed on the raw image, not on cascaded output.
    """
    spacing = config.reference_spacing if spacing_S is None else int(spacing_S)
    result = sweep(as_gray(image), config, spacing)
    return ThetaMap(result.theta_index, config.length_L, spacing)


def _angle_table(length_L: int) -> np.ndarray:
    n = orientation_count(length_L)
    return np.radians(
        np.array([orientation_angle(i, length_L) for i in range(1, n + 1)])
    )


def vector_components(tmap: ThetaMap) -> tuple[np.ndarray, np.ndarray]:
    """Unit-vector planes (cosine, sine) remapped into [0, 1].

    Absent pixels carry the zero vector, stored as (0.5, 0.5).
    """
    angles = _angle_table(tmap.length_L)
    cos_lut = np.concatenate(([0.0], np.cos(angles)))  # slot 0: absent
    sin_lut = np.concatenate(([0.0], np.sin(angles)))
    raw_x = cos_lut[tmap.indices]
    raw_y = sin_lut[tmap.indices]
    return (raw_x + 1.0) / 2.0, (raw_y + 1.0) / 2.0


def symbol_encode(tmap: ThetaMap) -> np.ndarray:
    """One scalar symbol per direction: index / 2(L-1), absent mapping to 0."""
    n = tmap.orientation_total
    lut = np.concatenate(([0.0], np.arange(1, n + 1) / float(n)))
    return lut[tmap.indices]


def render_vector_overlay(image, tmap: ThetaMap, path, stride: int = 4) -> None:
    """Debug rendering: arrows of the orientation field over the image.

    Requires matplotlib (``pip install odos[viz]``).  Inspection aid only.
    """
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    img = as_gray(image)
    angles = _angle_table(tmap.length_L)
    cos_lut = np.concatenate(([0.0], np.cos(angles)))
    sin_lut = np.concatenate(([0.0], np.sin(angles)))
    sub = tmap.indices[::stride, ::stride]
    ys, xs = np.mgrid[0 : img.shape[0] : stride, 0 : img.shape[1] : stride]
    u = cos_lut[sub]
    v = sin_lut[sub]
    present = sub != ABSENT

    fig, ax = plt.subplots(figsize=(7, 7 * img.shape[0] / img.shape[1]))
    ax.imshow(img, cmap="gray", interpolation="nearest")
    ax.quiver(
        xs[present],
        ys[present],
        u[present],
        -v[present],  # matplotlib's y axis points up; image rows point down
        color="lime",
        scale=40,
        width=0.003,
    )
    ax.set_axis_off()
    fig.savefig(path, bbox_inches="tight", dpi=150)
    plt.close(fig)
