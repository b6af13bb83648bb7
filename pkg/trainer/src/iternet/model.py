"""Iterative refinement UNet with a configurable input plane count.

A base UNet produces an initial probability map; each further iteration
runs a lighter mini-UNet on the concatenation of the base network's first
feature block and the previous iteration's last decoder features, so later
iterations see both raw appearance features and the current belief.  Every
iteration carries its own pixel head and all heads are supervised.  The
mini-UNet weights are shared across iterations by default.

Only the very first convolution depends on the number of input planes
(1, 2, or 4 matching the dataset's ablation mode); everything downstream
is identical, so ablation runs differ in exactly one parameter tensor.
"""

from __future__ import annotations

import torch
from torch import nn

VALID_IN_CHANNELS = (1, 2, 4)


def _block(in_ch: int, out_ch: int) -> nn.Sequential:
    def norm(ch):
        return nn.GroupNorm(min(8, ch), ch)

    return nn.Sequential(
        nn.Conv2d(in_ch, out_ch, 3, padding=1),
        norm(out_ch),
        nn.ReLU(inplace=True),
        nn.Conv2d(out_ch, out_ch, 3, padding=1),
        norm(out_ch),
        nn.ReLU(inplace=True),
    )


class UNetCore(nn.Module):
    """Plain UNet returning (first features, last features, logits)."""

    def __init__(self, in_channels: int, width: int, depth: int):
        super().__init__()
        self.depth = depth
        enc_widths = [width * (2 ** d) for d in range(depth)]
        self.encoders = nn.ModuleList()
        ch = in_channels
        for w in enc_widths:
            self.encoders.append(_block(ch, w))
            ch = w
        self.pool = nn.MaxPool2d(2)
        self.bottleneck = _block(ch, ch * 2)
        self.upsamples = nn.ModuleList()
        self.decoders = nn.ModuleList()
        ch = ch * 2
        for w in reversed(enc_widths):
            self.upsamples.append(nn.ConvTranspose2d(ch, w, 2, stride=2))
            self.decoders.append(_block(2 * w, w))
            ch = w
        self.head = nn.Conv2d(width, 1, 1)

    def forward(self, x):
        skips = []
        for encoder in self.encoders:
            x = encoder(x)
            skips.append(x)
            x = self.pool(x)
        x = self.bottleneck(x)
        for upsample, decoder, skip in zip(
            self.upsamples, self.decoders, reversed(skips)
        ):
            x = upsample(x)
            x = decoder(torch.cat([skip, x], dim=1))
        return skips[0], x, self.head(x)


class IterNet(nn.Module):
    """Base UNet plus (iterations - 1) refinement passes of a mini-UNet."""

    def __init__(self, in_channels: int, base_width: int = 32,
                 iterations: int = 3, share_weights: bool = True):
        super().__init__()
        if in_channels not in VALID_IN_CHANNELS:
            raise ValueError(
                f"in_channels must be one of {VALID_IN_CHANNELS}, got {in_channels}"
            )
        if iterations < 1:
            raise ValueError(f"iterations must be >= 1, got {iterations}")
        self.in_channels = in_channels
        self.iterations = iterations
        self.share_weights = share_weights
        self.base = UNetCore(in_channels, base_width, depth=3)
        refinements = iterations - 1
        if refinements:
            if share_weights:
                mini = UNetCore(2 * base_width, base_width, depth=2)
                self.minis = nn.ModuleList([mini] * refinements)
            else:
                self.minis = nn.ModuleList(
                    UNetCore(2 * base_width, base_width, depth=2)
                    for _ in range(refinements)
                )
        else:
            self.minis = nn.ModuleList()

    def forward(self, x) -> list[torch.Tensor]:
        """Logit maps of every iteration head, base first."""
        first, features, logits = self.base(x)
        outputs = [logits]
        for mini in self.minis:
            _, features, logits = mini(torch.cat([first, features], dim=1))
            outputs.append(logits)
        return outputs

    def probabilities(self, x) -> torch.Tensor:
        """Final-head per-pixel probabilities."""
        return torch.sigmoid(self.forward(x)[-1])
