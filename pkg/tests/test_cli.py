import numpy as np
import pytest
from PIL import Image
from odos.cli import EXIT_OK, EXIT_PARTIAL, EXIT_USAGE, load_config_file, main
from odos.dataset import read_channels_odst, read_dataset
from odos.filtering import FilterConfig, multi_step
from odos.image import load_image, save_image
FAST = ["--length", "3", "--spacings", "1"]
@pytest.fixture
def sample_image(tmp_path, rng):
    img = 0.2 + 0.2 * rng.random((64, 64))
    img[32, 6:58] = 0.9
    path = tmp_path / "input.png"
    save_image(img, path)
    return path
def make_dataset_dir(tmp_path, count=2, size=160):
    root = tmp_path / "data"
    (root / "images").mkdir(parents=True)
    (root / "labels").mkdir()
    rng = np.random.default_rng(5)
    for k in range(count):
        img = 0.3 + 0.2 * rng.random((size, size))
        img[50 + 10 * k, 10 : size - 10] = 0.95
        save_image(img, root / "images" / f"im{k}.png")
        mask = np.zeros((size, size), np.uint8)
        mask[50 + 10 * k, 10 : size - 10] = 1
        save_image(mask, root / "labels" / f"im{k}.png")
    return root
def test_filter_matches_library(tmp_path, sample_image):
    out = tmp_path / "amp.png"
    code = main(["filter", str(sample_image), str(out), *FAST, "--kappa", "0.7",
                 "--channel-policy", "as-is-gray"])
    assert code == EXIT_OK
    assert out.is_file()
    expected = tmp_path / "expected.png"
    img = load_image(sample_image, "as-is-gray")
    save_image(multi_step(img, FilterConfig(length_L=3, spacing_set=(1,))), expected)
    assert out.read_bytes() == expected.read_bytes()
    assert (tmp_path / "amp.png.run.cfg").is_file()
def test_filter_dump_per_spacing(tmp_path, sample_image):
    out = tmp_path / "amp.png"
    code = main(["filter", str(sample_image), str(out), "--length", "3",
                 "--spacings", "1,2", "--channel-policy", "as-is-gray",
                 "--dump-per-spacing"])
    assert code == EXIT_OK
    assert (tmp_path / "amp_S1.png").is_file()
    assert (tmp_path / "amp_S2.png").is_file()
def test_filter_missing_input(tmp_path):
    code = main(["filter", str(tmp_path / "nope.png"), str(tmp_path / "o.png")])
    assert code == EXIT_USAGE
def test_filter_bad_flag_combination(tmp_path, sample_image):
    code = main(["filter", str(sample_image), str(tmp_path / "o.png"),
                 "--spacings", "3,1"])
    assert code == EXIT_USAGE
def test_channels_png_planes(tmp_path, sample_image):
    prefix = tmp_path / "chan"
    code = main(["channels", str(sample_image), str(prefix), *FAST,
                 "--channel-policy", "as-is-gray"])
    assert code == EXIT_OK
    for k in (1, 2, 3, 4):
        assert (tmp_path / f"chan_v{k}.png").is_file()
def test_channels_ablation_plane_count(tmp_path, sample_image):
    prefix = tmp_path / "only"
    code = main(["channels", str(sample_image), str(prefix), *FAST,
                 "--channel-policy", "as-is-gray", "--ablation", "original-only"])
    assert code == EXIT_OK
    assert (tmp_path / "only_v1.png").is_file()
    assert not (tmp_path / "only_v2.png").exists()
    # the single plane is the input itself, quantization aside
    plane = np.asarray(Image.open(tmp_path / "only_v1.png"))
    original = np.asarray(Image.open(sample_image))
    assert np.array_equal(plane, original)
def test_outputs_into_fresh_subdirectory(tmp_path, sample_image):
    # parent directories of outputs are created on demand
    prefix = tmp_path / "stacks" / "deep" / "chan"
    code = main(["channels", str(sample_image), str(prefix), *FAST,
                 "--channel-policy", "as-is-gray"])
    assert code == EXIT_OK
    assert (tmp_path / "stacks" / "deep" / "chan_v1.png").is_file()
    out = tmp_path / "enh" / "amp.png"
    code = main(["filter", str(sample_image), str(out), *FAST,
                 "--channel-policy", "as-is-gray"])
    assert code == EXIT_OK and out.is_file()


def test_channels_odst_format(tmp_path, sample_image):
    prefix = tmp_path / "stack"
    code = main(["channels", str(sample_image), str(prefix), *FAST,
                 "--channel-policy", "as-is-gray", "--format", "odst"])
    assert code == EXIT_OK
    stack = read_channels_odst(tmp_path / "stack.odst")
    assert stack.shape == (4, 64, 64)
def test_prepare_deterministic_and_jobs_independent(tmp_path):
    root = make_dataset_dir(tmp_path)
    args = [str(root), "--patches-per-image", "4", "--augment-per-image", "2",
            "--seed", "33", *FAST, "--channel-policy", "as-is-gray"]
    outs = []
    for name, jobs in (("a.odst", "1"), ("b.odst", "1"), ("c.odst", "2")):
        out = tmp_path / name
        code = main(["prepare", args[0], str(out), *args[1:], "--jobs", jobs])
        assert code == EXIT_OK
        outs.append(out.read_bytes())
    assert outs[0] == outs[1] == outs[2]
    records = read_dataset(tmp_path / "a.odst")
    assert len(records) == 8
    assert (tmp_path / "a.manifest.json").is_file()
    assert (tmp_path / "a.odst.run.cfg").is_file()
def test_prepare_reports_unmatched_labels(tmp_path):
    root = make_dataset_dir(tmp_path)
    (root / "labels" / "im1.png").unlink()
    code = main(["prepare", str(root), str(tmp_path / "d.odst"),
                 "--patches-per-image", "2", "--augment-per-image", "1",
                 *FAST, "--channel-policy", "as-is-gray"])
    assert code == EXIT_PARTIAL
    assert (tmp_path / "d.odst").is_file()
def test_prepare_rejects_bad_layout(tmp_path):
    empty = tmp_path / "empty"
    empty.mkdir()
    code = main(["prepare", str(empty), str(tmp_path / "x.odst")])
    assert code == EXIT_USAGE
def test_eval_perfect_prediction(tmp_path, rng, capsys):
    pred = tmp_path / "pred"
    gt = tmp_path / "gt"
    pred.mkdir()
    gt.mkdir()
    for k in range(2):
        mask = (rng.random((20, 20)) > 0.5).astype(np.uint8)
        save_image(mask, pred / f"im{k}_pred.png")
        save_image(mask, gt / f"im{k}.png")
    csv = tmp_path / "scores.csv"
    code = main(["eval", str(pred), str(gt), "--csv", str(csv)])
    assert code == EXIT_OK
    lines = csv.read_text().strip().split("\n")
    assert lines[0] == "stem,iou,f1,acc,se,sp,pr"
    for line in lines[1:]:
        for cell in line.split(",")[1:]:
            assert cell == "1.000000"
    assert "MEAN" in capsys.readouterr().out
def test_eval_missing_counterpart(tmp_path, rng):
    pred = tmp_path / "pred"
    gt = tmp_path / "gt"
    pred.mkdir()
    gt.mkdir()
    mask = (rng.random((10, 10)) > 0.5).astype(np.uint8)
    save_image(mask, pred / "a.png")
    save_image(mask, pred / "b.png")
    save_image(mask, gt / "a.png")
    code = main(["eval", str(pred), str(gt), "--csv", str(tmp_path / "m.csv")])
    assert code == EXIT_PARTIAL
def test_config_file_applies_and_flags_override(tmp_path, sample_image):
    cfg = tmp_path / "run.cfg"
    cfg.write_text(
        "# pipeline parameters\n"
        "length = 3\n"
        "spacings = 1,2\n"
        "kappa = 0.5\n"
        "channel_policy = as-is-gray\n"
    )
    out = tmp_path / "amp.png"
    code = main(["filter", str(sample_image), str(out), "--config", str(cfg),
                 "--kappa", "0.7"])
    assert code == EXIT_OK
    resolved = load_config_file(out.with_name("amp.png.run.cfg"))
    assert resolved["length"] == 3
    assert resolved["spacings"] == (1, 2)
    assert resolved["kappa"] == 0.7  # flag wins over file
def test_config_file_rejects_unknown_keys(tmp_path, sample_image):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("lenght = 3\n")
    code = main(["filter", str(sample_image), str(tmp_path / "o.png"),
                 "--config", str(cfg)])
    assert code == EXIT_USAGE
def test_config_file_rejects_garbage_lines(tmp_path, sample_image):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("length 3\n")
    code = main(["filter", str(sample_image), str(tmp_path / "o.png"),
                 "--config", str(cfg)])
    assert code == EXIT_USAGE
def test_resolved_config_round_trips(tmp_path, sample_image):
    out = tmp_path / "amp.png"
    assert main(["filter", str(sample_image), str(out), *FAST,
                 "--channel-policy", "as-is-gray"]) == EXIT_OK
    resolved = load_config_file(tmp_path / "amp.png.run.cfg")
    assert resolved["length"] == 3
    assert resolved["spacings"] == (1,)
    assert resolved["channel_policy"] == "as-is-gray"
def test_usage_error_exit_code():
    assert main(["filter"]) == EXIT_USAGE
    assert main(["unknown-command"]) == EXIT_USAGE
