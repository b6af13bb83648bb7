"""Digital three-stick kernel geometry.

A stick of length ``L`` is a digital line segment of ``L`` integer pixel
offsets at one of ``2(L-1)`` uniformly quantized orientations covering
[0, 180).  A filtering kernel bundles three parallel sticks: the middle
stick through the origin plus a left and a right copy displaced by the
rounded perpendicular vector ``S * (-sin t, cos t)`` for inter-stick
spacing ``S``.

Rasterization walks the dominant axis one pixel per sample and rounds the
cross-axis coordinate half away from zero, which is the Bresenham line
through the segment's real-valued endpoints.  For odd ``L`` the middle
stick is point-symmetric about the origin; kernels at ``t`` and ``t + 90``
degrees are exact 90-degree rotations of each other.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

Offset = tuple[int, int]


def _round_away(value: float) -> int:
    """Round half away from zero (symmetric, so rotations stay exact)."""
    if value >= 0.0:
        return int(math.floor(value + 0.5))
    return int(math.ceil(value - 0.5))


def _half_snap(value: float, tol: float = 1e-9) -> float:
    """Pin values that should be exact half-integers.

    Quantized angles put sin/cos at algebraic values like 1/2, so
    perpendicular components hit the rounding tie exactly in math but land
    on either side of it in floats (sin(30 deg) evaluates below 1/2,
    cos(120 deg) above -1/2).  Snapping keeps the tie rule deterministic.
    """
    doubled = value * 2.0
    nearest = round(doubled)
    if abs(doubled - nearest) < tol:
        return nearest / 2.0
    return value


def orientation_count(length_L: int) -> int:
    """Number of quantized orientations for sticks of length ``length_L``."""
    if length_L < 2:
        raise ValueError(f"stick length must be >= 2, got {length_L}")
    return 2 * (length_L - 1)


def orientation_angle(index_i: int, length_L: int) -> float:
    """Angle in degrees of orientation ``index_i`` (1-based), in [0, 180)."""
    n = orientation_count(length_L)
    if not 1 <= index_i <= n:
        raise ValueError(f"orientation index must be in 1..{n}, got {index_i}")
    return (index_i - 1) * 180.0 / n


def middle_stick(length_L: int, index_i: int) -> tuple[Offset, ...]:
    """Offsets of the length-``L`` digital segment through (0, 0).

    Samples step one pixel along the dominant axis; the other coordinate is
    the rounded position on the continuous line.  Returns exactly ``L``
    distinct offsets ordered along the dominant axis.
    """
    theta = math.radians(orientation_angle(index_i, length_L))
    dx, dy = math.cos(theta), math.sin(theta)
    start = -((length_L - 1) // 2)
    steps = range(start, start + length_L)
    if abs(dx) >= abs(dy):
        ratio = dy / dx
        return tuple((u, _round_away(u * ratio)) for u in steps)
    ratio = dx / dy
    return tuple((_round_away(v * ratio), v) for v in steps)


def perpendicular_offset(length_L: int, spacing_S: float, index_i: int) -> Offset:
    """Rounded displacement ``S * (-sin t, cos t)`` from middle to right stick."""
    theta = math.radians(orientation_angle(index_i, length_L))
    return (
        _round_away(_half_snap(spacing_S * -math.sin(theta))),
        _round_away(_half_snap(spacing_S * math.cos(theta))),
    )


@dataclass(frozen=True)
class StickKernel:
    """Three parallel digital sticks for one (length, spacing, orientation)."""

    length_L: int
    spacing_S: int
    orientation_index: int
    angle_deg: float
    left: tuple[Offset, ...]
    middle: tuple[Offset, ...]
    right: tuple[Offset, ...]

    def all_offsets(self) -> tuple[Offset, ...]:
        return self.left + self.middle + self.right


def build_kernel(length_L: int, spacing_S: int, index_i: int) -> StickKernel:
    """Build the three-stick kernel for one orientation.

    The left/right sticks are the middle stick translated by minus/plus the
    rounded perpendicular displacement; for any ``S >= 1`` that displacement
    is nonzero, so the sticks never coincide.
    """
    if spacing_S < 1:
        raise ValueError(f"inter-stick spacing must be >= 1, got {spacing_S}")
    mid = middle_stick(length_L, index_i)
    disp = perpendicular_offset(length_L, spacing_S, index_i)
    if disp == (0, 0):
        raise ValueError(
            f"degenerate kernel: zero perpendicular displacement at "
            f"L={length_L}, S={spacing_S}, i={index_i}"
        )
    ddx, ddy = disp
    left = tuple((x - ddx, y - ddy) for x, y in mid)
    right = tuple((x + ddx, y + ddy) for x, y in mid)
    return StickKernel(
        length_L=int(length_L),
        spacing_S=int(spacing_S),
        orientation_index=int(index_i),
        angle_deg=orientation_angle(index_i, length_L),
        left=left,
        middle=mid,
        right=right,
    )


@lru_cache(maxsize=64)
def kernel_table(length_L: int, spacing_S: int) -> tuple[StickKernel, ...]:
    """All orientation kernels for one (L, S), built once and shared read-only."""
    n = orientation_count(length_L)
    return tuple(build_kernel(length_L, spacing_S, i) for i in range(1, n + 1))
