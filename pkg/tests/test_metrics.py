import numpy as np
import pytest

from odos.image import save_image
from odos.metrics import (
    ConfusionCounts,
    confusion,
    evaluate_dataset,
    score,
    to_csv,
    to_table,
)
from oracles import brute_confusion, fraction_scores


def test_confusion_hand_case():
    pred = np.array([[1, 0], [1, 0]], np.uint8)
    gt = np.array([[1, 1], [0, 0]], np.uint8)
    c = confusion(pred, gt)
    assert (c.tp, c.fp, c.fn, c.tn) == (1, 1, 1, 1)
    assert c.total == 4


def test_confusion_perfect_prediction(rng):
    gt = (rng.random((16, 16)) > 0.5).astype(np.uint8)
    c = confusion(gt, gt)
    assert c.fp == 0 and c.fn == 0
    assert c.tp == int(gt.sum())


def test_confusion_with_fov(rng):
    pred = np.ones((8, 8), np.uint8)
    gt = np.zeros((8, 8), np.uint8)
    fov = np.zeros((8, 8), np.uint8)
    fov[:4] = 1
    c = confusion(pred, gt, fov)
    assert (c.tp, c.fp, c.fn, c.tn) == (0, 32, 0, 0)


def test_confusion_shape_checks(rng):
    with pytest.raises(ValueError):
        confusion(np.zeros((4, 4), np.uint8), np.zeros((5, 4), np.uint8))
    with pytest.raises(ValueError):
        confusion(np.zeros((4, 4), np.uint8), np.zeros((4, 4), np.uint8),
                  np.zeros((3, 3), np.uint8))


def test_confusion_matches_brute_force(rng):
    for seed in range(100):
        gen = np.random.default_rng(seed)
        pred = (gen.random((32, 32)) > 0.4).astype(np.uint8)
        gt = (gen.random((32, 32)) > 0.6).astype(np.uint8)
        fov = (gen.random((32, 32)) > 0.2).astype(np.uint8) if seed % 3 else None
        c = confusion(pred, gt, fov)
        assert (c.tp, c.fp, c.fn, c.tn) == brute_confusion(pred, gt, fov)


def test_confusion_invariant_to_pixel_order(rng):
    pred = (rng.random((10, 10)) > 0.5).astype(np.uint8)
    gt = (rng.random((10, 10)) > 0.5).astype(np.uint8)
    perm = rng.permutation(100)
    a = confusion(pred, gt)
    b = confusion(pred.ravel()[perm].reshape(10, 10),
                  gt.ravel()[perm].reshape(10, 10))
    assert a == b


def test_swapping_pred_and_gt(rng):
    pred = (rng.random((12, 12)) > 0.5).astype(np.uint8)
    gt = (rng.random((12, 12)) > 0.5).astype(np.uint8)
    a = confusion(pred, gt)
    b = confusion(gt, pred)
    assert (a.tp, a.tn) == (b.tp, b.tn)
    assert (a.fp, a.fn) == (b.fn, b.fp)
    ra, rb = score(a), score(b)
    assert ra.f1 == rb.f1 and ra.iou == rb.iou and ra.acc == rb.acc
    assert (ra.se, ra.pr) == (rb.pr, rb.se)


def test_score_examples():
    r = score(ConfusionCounts(tp=8, fp=0, fn=2, tn=0))
    assert r.se == 0.8
    r = score(ConfusionCounts(tp=1, fp=2, fn=1, tn=0))
    assert r.iou == 0.25
    assert r.pr == pytest.approx(1 / 3)
    assert r.se == 0.5
    assert r.f1 == 0.4
    assert r.f1 == 2 * r.iou / (1 + r.iou)
    r = score(ConfusionCounts(tp=37, fp=0, fn=0, tn=63))
    assert (r.f1, r.iou, r.acc) == (1.0, 1.0, 1.0)
    assert r.degenerate == ()


def test_score_zero_over_zero_flags():
    r = score(ConfusionCounts(0, 0, 0, 10))
    assert (r.se, r.pr, r.f1, r.iou) == (0.0, 0.0, 0.0, 0.0)
    assert set(r.degenerate) == {"se", "pr", "f1", "iou"}
    assert (r.sp, r.acc) == (1.0, 1.0)
    r = score(ConfusionCounts(0, 0, 0, 0))
    assert set(r.degenerate) == {"se", "sp", "pr", "acc", "f1", "iou"}


def test_counts_validation():
    with pytest.raises(ValueError):
        ConfusionCounts(-1, 0, 0, 0)


def test_f1_iou_identity_exact(rng):
    for _ in range(1000):
        tp, fp, fn, tn = (int(v) for v in rng.integers(0, 5000, size=4))
        rec = score(ConfusionCounts(tp, fp, fn, tn))
        frac = fraction_scores(tp, fp, fn, tn)
        if frac["iou"] is not None:
            identity = 2 * frac["iou"] / (1 + frac["iou"])
            assert rec.f1 == float(identity)
            assert rec.iou == float(frac["iou"])
            # and the reverse direction
            assert rec.iou == float(
                frac["f1"] / (2 - frac["f1"])
            )


def _write_pair(tmp_path, stem, f1_target):
    """Masks engineered so f1 = 2tp/(2tp+fp+fn) hits the target exactly."""
    tp, fp = f1_target
    pred = np.zeros((10, 10), np.uint8)
    gt = np.zeros((10, 10), np.uint8)
    pred.ravel()[: tp + fp] = 1
    gt.ravel()[:tp] = 1
    (tmp_path / "pred").mkdir(exist_ok=True)
    (tmp_path / "gt").mkdir(exist_ok=True)
    save_image(pred, tmp_path / "pred" / f"{stem}_pred.png")
    save_image(gt, tmp_path / "gt" / f"{stem}.png")


def test_evaluate_dataset_single_pair(tmp_path):
    _write_pair(tmp_path, "one", (3, 4))  # f1 = 6/10
    result = evaluate_dataset(tmp_path / "pred", tmp_path / "gt")
    assert result.complete
    assert len(result.rows) == 1
    assert result.rows[0][0] == "one"
    row = result.rows[0][1]
    assert (result.mean.iou, result.mean.f1, result.mean.acc) == (row.iou, row.f1, row.acc)
    assert result.mean.f1 == row.f1 == 0.6


def test_evaluate_dataset_mean(tmp_path):
    _write_pair(tmp_path, "a", (1, 8))  # f1 = 2/10 = 0.2
    _write_pair(tmp_path, "b", (3, 4))  # f1 = 6/10 = 0.6
    result = evaluate_dataset(tmp_path / "pred", tmp_path / "gt")
    assert [stem for stem, _ in result.rows] == ["a", "b"]
    assert result.mean.f1 == pytest.approx(0.4)


def test_evaluate_dataset_random_against_oracle(tmp_path, rng):
    pred_dir = tmp_path / "pred"
    gt_dir = tmp_path / "gt"
    pred_dir.mkdir()
    gt_dir.mkdir()
    expected = {}
    for k in range(20):
        pred = (rng.random((12, 12)) > 0.5).astype(np.uint8)
        gt = (rng.random((12, 12)) > 0.5).astype(np.uint8)
        save_image(pred, pred_dir / f"s{k:02d}.png")
        save_image(gt, gt_dir / f"s{k:02d}.png")
        expected[f"s{k:02d}"] = brute_confusion(pred, gt)
    result = evaluate_dataset(pred_dir, gt_dir)
    assert len(result.rows) == 20
    f1s = []
    for stem, rec in result.rows:
        tp, fp, fn, tn = expected[stem]
        frac = fraction_scores(tp, fp, fn, tn)
        assert rec.f1 == float(frac["f1"])
        f1s.append(rec.f1)
    assert result.mean.f1 == pytest.approx(sum(f1s) / len(f1s))


def test_evaluate_dataset_ignores_companion_outputs(tmp_path):
    # probability maps written next to *_pred masks must not break pairing
    _write_pair(tmp_path, "case", (3, 4))
    save_image(np.full((10, 10), 0.5), tmp_path / "pred" / "case_prob.png")
    result = evaluate_dataset(tmp_path / "pred", tmp_path / "gt")
    assert result.complete
    assert [stem for stem, _ in result.rows] == ["case"]


def test_evaluate_dataset_reports_missing(tmp_path):
    _write_pair(tmp_path, "kept", (3, 4))
    save_image(np.zeros((10, 10), np.uint8), tmp_path / "pred" / "orphan_pred.png")
    result = evaluate_dataset(tmp_path / "pred", tmp_path / "gt")
    assert not result.complete
    assert result.missing_gt == ["orphan"]
    assert [stem for stem, _ in result.rows] == ["kept"]


def test_csv_and_table_format(tmp_path):
    _write_pair(tmp_path, "img1", (3, 4))
    result = evaluate_dataset(tmp_path / "pred", tmp_path / "gt")
    csv = to_csv(result)
    lines = csv.strip().split("\n")
    assert lines[0] == "stem,iou,f1,acc,se,sp,pr"
    assert lines[1].startswith("img1,")
    assert lines[-1].startswith("MEAN,")
    cells = lines[1].split(",")
    assert cells[2] == "0.600000"
    assert all(len(cell.split(".")[1]) == 6 for cell in cells[1:])
    table = to_table(result)
    assert "MEAN" in table and "img1" in table
