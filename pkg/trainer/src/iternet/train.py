"""Training loop: Adam on deep-supervised binary cross-entropy.

The loss is the unweighted mean of per-pixel BCE over every iteration
head.  Shuffling is a pure function of (seed, epoch), so a rerun with the
same seed reproduces batch composition exactly.  When a validation split
exists (by default the last 10% of records), the checkpoint tracks the
best validation F1; otherwise the final weights are kept.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass
from pathlib import Path

import numpy as np
import torch
from torch import nn

from .model import VALID_IN_CHANNELS, IterNet
from .odst import read_patch_dataset


@dataclass
class TrainConfig:
    in_channels: int = 4
    iterations: int = 3
    base_width: int = 32
    lr: float = 0.001
    epochs: int = 100
    batch: int = 4
    seed: int = 0
    share_weights: bool = True
    val_fraction: float = 0.1
    threshold: float = 0.5
    target_train_f1: float | None = None  # early stop for toy/overfit runs

    def __post_init__(self):
        if self.in_channels not in VALID_IN_CHANNELS:
            raise ValueError(
                f"in_channels must be one of {VALID_IN_CHANNELS}, got {self.in_channels}"
            )
        if self.lr <= 0:
            raise ValueError("lr must be positive")
        if self.epochs < 1 or self.batch < 1 or self.iterations < 1:
            raise ValueError("epochs, batch, and iterations must be >= 1")
        if not 0.0 <= self.val_fraction < 1.0:
            raise ValueError("val_fraction must be in [0, 1)")


def build_model(cfg: TrainConfig) -> IterNet:
    torch.manual_seed(cfg.seed)
    return IterNet(cfg.in_channels, cfg.base_width, cfg.iterations,
                   cfg.share_weights)


def pooled_f1(pred: np.ndarray, truth: np.ndarray) -> float:
    """Pixel-pooled F1 = 2tp / (2tp + fp + fn); 0 when undefined."""
    p = pred.astype(bool)
    t = truth.astype(bool)
    tp = int(np.count_nonzero(p & t))
    fp = int(np.count_nonzero(p & ~t))
    fn = int(np.count_nonzero(~p & t))
    den = 2 * tp + fp + fn
    return 2 * tp / den if den else 0.0


def _deep_supervision_loss(logit_maps, target, bce):
    total = 0.0
    for logits in logit_maps:
        total = total + bce(logits, target)
    return total / len(logit_maps)


@torch.no_grad()
def _dataset_f1(model: IterNet, images, labels, threshold, batch) -> float:
    model.eval()
    masks = []
    for start in range(0, len(images), batch):
        x = torch.from_numpy(images[start : start + batch])
        probs = model.probabilities(x).squeeze(1).numpy()
        masks.append(probs >= threshold)
    return pooled_f1(np.concatenate(masks), labels)


def train(dataset_path: str | Path, cfg: TrainConfig,
          out_dir: str | Path) -> tuple[IterNet, list[dict]]:
    """Train on an ODST container; write weights and a JSON epoch log.

    Returns the trained model (best-validation weights when a validation
    split exists) and the per-epoch log.
    """
    images, labels = read_patch_dataset(dataset_path)
    if images.shape[1] != cfg.in_channels:
        raise ValueError(
            f"dataset has {images.shape[1]} channels but the model expects "
            f"{cfg.in_channels}"
        )
    n_val = int(len(images) * cfg.val_fraction)
    train_images, train_labels = images[: len(images) - n_val], labels[: len(labels) - n_val]
    val_images, val_labels = images[len(images) - n_val :], labels[len(labels) - n_val :]
    if not len(train_images):
        raise ValueError("no training records after the validation split")

    model = build_model(cfg)
    optimizer = torch.optim.Adam(model.parameters(), lr=cfg.lr)
    bce = nn.BCEWithLogitsLoss()

    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    weights_path = out_dir / "weights.pt"
    log: list[dict] = []
    best_val = -1.0

    for epoch in range(1, cfg.epochs + 1):
        order = np.random.default_rng((cfg.seed, epoch)).permutation(len(train_images))
        model.train()
        epoch_loss = 0.0
        seen = 0
        masks = []
        for start in range(0, len(order), cfg.batch):
            idx = order[start : start + cfg.batch]
            x = torch.from_numpy(train_images[idx])
            y = torch.from_numpy(train_labels[idx]).unsqueeze(1)
            optimizer.zero_grad()
            logit_maps = model(x)
            loss = _deep_supervision_loss(logit_maps, y, bce)
            loss.backward()
            optimizer.step()
            epoch_loss += float(loss.detach()) * len(idx)
            seen += len(idx)
            with torch.no_grad():
                probs = torch.sigmoid(logit_maps[-1]).squeeze(1).numpy()
            masks.append((probs >= cfg.threshold, train_labels[idx]))

        train_f1 = pooled_f1(
            np.concatenate([m for m, _ in masks]),
            np.concatenate([t for _, t in masks]),
        )
        entry = {"epoch": epoch, "loss": epoch_loss / seen, "train_f1": train_f1}
        if len(val_images):
            val_f1 = _dataset_f1(model, val_images, val_labels, cfg.threshold,
                                 cfg.batch)
            entry["val_f1"] = val_f1
            if val_f1 > best_val:
                best_val = val_f1
                save_checkpoint(model, cfg, weights_path)
        log.append(entry)
        if cfg.target_train_f1 is not None and train_f1 >= cfg.target_train_f1:
            break

    if not len(val_images):
        save_checkpoint(model, cfg, weights_path)
    else:
        state = torch.load(weights_path, weights_only=True)
        model.load_state_dict(state["state_dict"])
    (out_dir / "train_log.json").write_text(json.dumps(log, indent=2) + "\n")
    return model, log


def save_checkpoint(model: IterNet, cfg: TrainConfig, path: str | Path) -> None:
    torch.save({"state_dict": model.state_dict(), "config": asdict(cfg)}, path)


def load_checkpoint(path: str | Path) -> tuple[IterNet, TrainConfig]:
    state = torch.load(path, weights_only=True)
    cfg = TrainConfig(**state["config"])
    model = IterNet(cfg.in_channels, cfg.base_width, cfg.iterations,
                    cfg.share_weights)
    model.load_state_dict(state["state_dict"])
    model.eval()
    return model, cfg
