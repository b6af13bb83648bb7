"""Iterative refinement UNet training on ODST patch containers."""

from .model import IterNet, UNetCore
from .odst import ContainerError, read_channel_stack, read_patch_dataset
from .predict import load_channel_planes, predict_array, predict_to_files
from .train import (
    TrainConfig,
    build_model,
    load_checkpoint,
    pooled_f1,
    save_checkpoint,
    train,
)

__version__ = "0.1.0"
