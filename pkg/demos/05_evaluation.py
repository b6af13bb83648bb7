"""Scoring segmentations: confusion counts, six metrics, dataset tables.

Synthetic "predictions" of varying quality are scored against ground truth,
with and without a field-of-view restriction, ending in the same CSV/table
output the `odos eval` subcommand produces.

Run:  python3 demos/05_evaluation.py
"""

from pathlib import Path

import numpy as np

from odos import (
    confusion,
    evaluate_dataset,
    save_image,
    score,
    to_csv,
    to_table,
)

OUT = Path(__file__).parent / "output" / "eval_demo"
rng = np.random.default_rng(11)


def vessel_mask(size=96, seed=0):
    gen = np.random.default_rng(seed)
    mask = np.zeros((size, size), np.uint8)
    xs = np.arange(4, size - 4)
    for base in (0.3, 0.55, 0.72):
        ys = (base * size + 10 * np.sin(xs / (11 + 6 * base))).astype(int)
        mask[ys.clip(0, size - 1), xs] = 1
    return mask


def degrade(mask, drop, add, seed):
    gen = np.random.default_rng(seed)
    pred = mask.copy()
    pred[gen.random(mask.shape) < drop] = 0          # missed vessels
    pred[(gen.random(mask.shape) < add) & (mask == 0)] = 1  # spurious pixels
    return pred


# ---- single pair, scored by hand-visible counts
gt = vessel_mask(seed=1)
pred = degrade(gt, drop=0.2, add=0.01, seed=2)
counts = confusion(pred, gt)
rec = score(counts)
print(f"counts: tp={counts.tp} fp={counts.fp} fn={counts.fn} tn={counts.tn}")
print(f"scores: f1={rec.f1:.4f} iou={rec.iou:.4f} se={rec.se:.4f} "
      f"sp={rec.sp:.4f} pr={rec.pr:.4f} acc={rec.acc:.4f}")
print(f"identity check: 2*iou/(1+iou) = {2 * rec.iou / (1 + rec.iou):.12f}")

# ---- a field of view excludes the corners from scoring
fov = np.zeros_like(gt)
yy, xx = np.mgrid[0 : gt.shape[0], 0 : gt.shape[1]]
center = (gt.shape[0] - 1) / 2
fov[(yy - center) ** 2 + (xx - center) ** 2 < center ** 2] = 1
rec_fov = score(confusion(pred, gt, fov))
print(f"with fov: acc {rec.acc:.4f} -> {rec_fov.acc:.4f} "
      f"(corners no longer count as easy negatives)")

# ---- directory-level evaluation, the cmd_eval path
for sub in ("pred", "gt", "fov"):
    (OUT / sub).mkdir(parents=True, exist_ok=True)
for k, quality in enumerate((0.05, 0.2, 0.45)):
    gt_k = vessel_mask(seed=20 + k)
    save_image(gt_k, OUT / "gt" / f"case{k}.png")
    save_image(degrade(gt_k, quality, 0.01, 90 + k), OUT / "pred" / f"case{k}_pred.png")
    save_image(fov, OUT / "fov" / f"case{k}.png")

result = evaluate_dataset(OUT / "pred", OUT / "gt", OUT / "fov")
print()
print(to_table(result), end="")
csv_path = OUT / "metrics.csv"
csv_path.write_text(to_csv(result))
print("wrote", csv_path)
