"""Three-stick kernel geometry, orientation by orientation.

Each filtering kernel is a middle stick of L pixels through the origin plus
two parallel copies displaced perpendicular to it by the inter-stick
spacing S.  This script rasterizes every kernel at L=7 so you can see the
2(L-1) = 12 quantized orientations and how S pushes the side sticks out.

Run:  python3 demos/01_stick_kernels.py
"""

from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from odos import build_kernel, orientation_angle, orientation_count

OUT = Path(__file__).parent / "output"
OUT.mkdir(exist_ok=True)

L = 7
n_orient = orientation_count(L)
print(f"L={L} sticks quantize [0,180) into {n_orient} orientations")

for S in (1, 3):
    fig, axes = plt.subplots(2, 6, figsize=(14, 5))
    for index, ax in zip(range(1, n_orient + 1), axes.ravel()):
        kern = build_kernel(L, S, index)
        # paint each stick into a small canvas: left=1, middle=2, right=3
        canvas = np.zeros((2 * (L + S) + 1,) * 2)
        c = L + S
        for value, stick in ((1, kern.left), (2, kern.middle), (3, kern.right)):
            for dx, dy in stick:
                canvas[c + dy, c + dx] = value
        ax.imshow(canvas, cmap="viridis", interpolation="nearest")
        ax.set_title(f"i={index}  {orientation_angle(index, L):.0f}\N{DEGREE SIGN}")
        ax.set_axis_off()
    fig.suptitle(f"Three-stick kernels, L={L}, spacing S={S}")
    fig.tight_layout()
    out = OUT / f"kernels_L{L}_S{S}.png"
    fig.savefig(out, dpi=130)
    plt.close(fig)
    print("wrote", out)

# The middle stick always contains the origin and, for odd L, is point
# symmetric; the side sticks never touch it.
kern = build_kernel(7, 2, 5)
assert (0, 0) in kern.middle
assert not set(kern.middle) & set(kern.left)
print("example kernel at 60 degrees:")
print("  middle:", kern.middle)
print("  left:  ", kern.left)
print("  right: ", kern.right)
