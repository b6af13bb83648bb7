"""Confusion counts and segmentation scores, per image and per dataset.

Scores are computed as single divisions of exact integer counts, so each
value is the correctly rounded float of the true rational.  F1 uses the
equivalent form 2*tp / (2*tp + fp + fn), which keeps the algebraic identity
F1 = 2*IoU / (1 + IoU) exact in floating point.  A 0/0 score is defined as
0 and the metric name is recorded in the record's ``degenerate`` tuple so
empty-ground-truth images cannot silently poison dataset means.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .image import as_mask, load_mask

RASTER_SUFFIXES = (".png", ".pgm", ".ppm")


@dataclass(frozen=True)
class ConfusionCounts:
    tp: int
    fp: int
    fn: int
    tn: int

    def __post_init__(self):
        if min(self.tp, self.fp, self.fn, self.tn) < 0:
            raise ValueError("confusion counts must be non-negative")

    @property
    def total(self) -> int:
        return self.tp + self.fp + self.fn + self.tn


@dataclass(frozen=True)
class MetricsRecord:
    se: float
    sp: float
    pr: float
    acc: float
    f1: float
    iou: float
    degenerate: tuple[str, ...] = ()


def confusion(pred, gt, fov=None) -> ConfusionCounts:
    """Count TP/FP/FN/TN over the field of view (all pixels if ``fov`` is None)."""
    pred = as_mask(pred)
    gt = as_mask(gt)
    if pred.shape != gt.shape:
        raise ValueError(f"prediction {pred.shape} and truth {gt.shape} sizes differ")
    if fov is not None:
        fov = as_mask(fov)
        if fov.shape != pred.shape:
            raise ValueError(f"fov {fov.shape} does not match masks {pred.shape}")
        select = fov == 1
        pred = pred[select]
        gt = gt[select]
    p = pred == 1
    g = gt == 1
    tp = int(np.count_nonzero(p & g))
    fp = int(np.count_nonzero(p & ~g))
    fn = int(np.count_nonzero(~p & g))
    tn = int(np.count_nonzero(~p & ~g))
    return ConfusionCounts(tp, fp, fn, tn)


def _ratio(name: str, num: int, den: int, flags: list[str]) -> float:
    if den == 0:
        flags.append(name)
        return 0.0
    return num / den


def score(c: ConfusionCounts) -> MetricsRecord:
    """Six scores from one set of counts; 0/0 cases score 0 and get flagged."""
    flags: list[str] = []
    se = _ratio("se", c.tp, c.tp + c.fn, flags)
    sp = _ratio("sp", c.tn, c.tn + c.fp, flags)
    pr = _ratio("pr", c.tp, c.tp + c.fp, flags)
    acc = _ratio("acc", c.tp + c.tn, c.total, flags)
    f1 = _ratio("f1", 2 * c.tp, 2 * c.tp + c.fp + c.fn, flags)
    iou = _ratio("iou", c.tp, c.tp + c.fn + c.fp, flags)
    return MetricsRecord(se, sp, pr, acc, f1, iou, tuple(flags))


@dataclass
class DatasetEvaluation:
    rows: list[tuple[str, MetricsRecord]]
    mean: MetricsRecord
    missing_gt: list[str]
    missing_fov: list[str]

    @property
    def complete(self) -> bool:
        return not self.missing_gt and not self.missing_fov


def _stem(path: Path) -> str:
    name = path.stem
    return name[: -len("_pred")] if name.endswith("_pred") else name


def _index_dir(directory: Path, prefer_pred_suffix: bool = False) -> dict[str, Path]:
    paths = [p for p in sorted(directory.iterdir())
             if p.suffix.lower() in RASTER_SUFFIXES]
    if prefer_pred_suffix:
        # prediction directories may hold companion files (probability maps
        # and the like); explicit *_pred masks win when any are present
        marked = [p for p in paths if p.stem.endswith("_pred")]
        if marked:
            paths = marked
    table: dict[str, Path] = {}
    for path in paths:
        table.setdefault(_stem(path), path)
    return table


def _mean_record(rows: list[tuple[str, MetricsRecord]]) -> MetricsRecord:
    if not rows:
        return MetricsRecord(0.0, 0.0, 0.0, 0.0, 0.0, 0.0, ("empty",))
    n = len(rows)
    return MetricsRecord(
        se=math.fsum(r.se for _, r in rows) / n,
        sp=math.fsum(r.sp for _, r in rows) / n,
        pr=math.fsum(r.pr for _, r in rows) / n,
        acc=math.fsum(r.acc for _, r in rows) / n,
        f1=math.fsum(r.f1 for _, r in rows) / n,
        iou=math.fsum(r.iou for _, r in rows) / n,
    )


def evaluate_dataset(pred_dir, gt_dir, fov_dir=None) -> DatasetEvaluation:
    """Score every prediction against the ground truth with the same stem.

    Prediction stems may carry a ``_pred`` suffix, which is stripped for
    pairing; when any ``*_pred`` files exist, only they count as
    predictions (companion outputs like probability maps are ignored).
    Predictions without a ground truth (or, when ``fov_dir`` is given,
    without a field-of-view mask) are skipped and reported in the
    ``missing_*`` lists.  The mean row is the unweighted per-image mean.
    """
    preds = _index_dir(Path(pred_dir), prefer_pred_suffix=True)
    gts = _index_dir(Path(gt_dir))
    fovs = _index_dir(Path(fov_dir)) if fov_dir is not None else None
    rows: list[tuple[str, MetricsRecord]] = []
    missing_gt: list[str] = []
    missing_fov: list[str] = []
    for stem in sorted(preds):
        if stem not in gts:
            missing_gt.append(stem)
            continue
        if fovs is not None and stem not in fovs:
            missing_fov.append(stem)
            continue
        pred = load_mask(preds[stem])
        gt = load_mask(gts[stem])
        fov = load_mask(fovs[stem]) if fovs is not None else None
        rows.append((stem, score(confusion(pred, gt, fov))))
    return DatasetEvaluation(rows, _mean_record(rows), missing_gt, missing_fov)


_CSV_COLUMNS = ("iou", "f1", "acc", "se", "sp", "pr")


def to_csv(evaluation: DatasetEvaluation) -> str:
    """CSV table: header, one 6-decimal row per image, final MEAN row."""
    lines = ["stem," + ",".join(_CSV_COLUMNS)]
    for stem, rec in evaluation.rows:
        lines.append(stem + "," + ",".join(f"{getattr(rec, c):.6f}" for c in _CSV_COLUMNS))
    mean = evaluation.mean
    lines.append("MEAN," + ",".join(f"{getattr(mean, c):.6f}" for c in _CSV_COLUMNS))
    return "\n".join(lines) + "\n"


def to_table(evaluation: DatasetEvaluation) -> str:
    """Fixed-width text table of the same rows as :func:`to_csv`."""
    stems = [stem for stem, _ in evaluation.rows] + ["MEAN"]
    width = max([4] + [len(s) for s in stems])
    header = f"{'stem':<{width}}  " + "  ".join(f"{c:>8}" for c in _CSV_COLUMNS)
    lines = [header, "-" * len(header)]
    for stem, rec in list(evaluation.rows) + [("MEAN", evaluation.mean)]:
        cells = "  ".join(f"{getattr(rec, c):8.6f}" for c in _CSV_COLUMNS)
        lines.append(f"{stem:<{width}}  {cells}")
    return "\n".join(lines) + "\n"
