"""Full-image inference and mask export.

Inputs are reflect-padded to the next multiple of 8 (the deepest pooling
stride), run through the final iteration head, and cropped back.  The
probability map and the thresholded mask are written as 8-bit PNGs named
``<stem>_prob.png`` and ``<stem>_pred.png`` so downstream evaluation can
pair masks with ground truth by stem.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np
import torch
from PIL import Image

from .model import IterNet
from .odst import read_channel_stack

STRIDE = 8


def predict_array(model: IterNet, channels: np.ndarray,
                  threshold: float = 0.5) -> tuple[np.ndarray, np.ndarray]:
    """Probability map and binary mask for one (C, H, W) stack in [0, 1]."""
    stack = np.asarray(channels, dtype=np.float32)
    if stack.ndim != 3:
        raise ValueError(f"channel stack must be (C, H, W), got {stack.shape}")
    if stack.shape[0] != model.in_channels:
        raise ValueError(
            f"stack has {stack.shape[0]} planes but the model expects "
            f"{model.in_channels}"
        )
    _, h, w = stack.shape
    pad_h = (-h) % STRIDE
    pad_w = (-w) % STRIDE
    x = torch.from_numpy(stack).unsqueeze(0)
    if pad_h or pad_w:
        x = torch.nn.functional.pad(x, (0, pad_w, 0, pad_h), mode="reflect")
    model.eval()
    with torch.no_grad():
        probs = model.probabilities(x)[0, 0, :h, :w].numpy()
    return probs, (probs >= threshold).astype(np.uint8)


def load_channel_planes(prefix: str | Path, count: int) -> np.ndarray:
    """Read ``<prefix>_v1.png .. _v<count>.png`` into a [0, 1] stack."""
    prefix = Path(prefix)
    planes = []
    for k in range(1, count + 1):
        path = prefix.with_name(f"{prefix.name}_v{k}.png")
        with Image.open(path) as img:
            if img.mode != "L":
                raise ValueError(f"{path}: expected an 8-bit grayscale plane")
            planes.append(np.asarray(img, dtype=np.float32) / 255.0)
    return np.stack(planes)


def _save_gray(values: np.ndarray, path: Path) -> None:
    data = np.floor(np.clip(values, 0.0, 1.0) * 255.0 + 0.5).astype(np.uint8)
    Image.fromarray(data, mode="L").save(path)


def predict_to_files(model: IterNet, channels: np.ndarray, out_dir: str | Path,
                     stem: str, threshold: float = 0.5) -> tuple[Path, Path]:
    """Run inference and write ``<stem>_prob.png`` and ``<stem>_pred.png``."""
    probs, mask = predict_array(model, channels, threshold)
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    prob_path = out_dir / f"{stem}_prob.png"
    mask_path = out_dir / f"{stem}_pred.png"
    _save_gray(probs, prob_path)
    Image.fromarray(mask * np.uint8(255), mode="L").save(mask_path)
    return prob_path, mask_path


def load_stack(channels_prefix: str | Path | None, odst_path: str | Path | None,
               count: int) -> np.ndarray:
    """Stack from either per-plane PNGs or a single-record container."""
    if (channels_prefix is None) == (odst_path is None):
        raise ValueError("provide exactly one of channels_prefix or odst_path")
    if odst_path is not None:
        return read_channel_stack(odst_path)
    return load_channel_planes(channels_prefix, count)
