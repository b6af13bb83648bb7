"""Command line: train on a patch container, predict on channel stacks."""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .odst import ContainerError, read_patch_dataset
from .predict import load_stack, predict_to_files
from .train import TrainConfig, load_checkpoint, train


def cmd_train(args) -> int:
    images, _ = read_patch_dataset(args.data)
    in_channels = args.in_channels or images.shape[1]
    cfg = TrainConfig(
        in_channels=in_channels,
        iterations=args.iterations,
        base_width=args.base_width,
        lr=args.lr,
        epochs=args.epochs,
        batch=args.batch,
        seed=args.seed,
        val_fraction=args.val_fraction,
        target_train_f1=args.target_train_f1,
    )
    _, log = train(args.data, cfg, args.out)
    last = log[-1]
    print(f"trained {last['epoch']} epochs, final loss {last['loss']:.4f}, "
          f"train F1 {last['train_f1']:.4f}"
          + (f", val F1 {last['val_f1']:.4f}" if "val_f1" in last else ""))
    print(f"weights: {Path(args.out) / 'weights.pt'}")
    return 0


def cmd_predict(args) -> int:
    model, cfg = load_checkpoint(args.weights)
    stack = load_stack(args.channels_prefix, args.odst, model.in_channels)
    stem = args.stem or (
        Path(args.odst).stem if args.odst else Path(args.channels_prefix).name
    )
    prob_path, mask_path = predict_to_files(model, stack, args.out, stem,
                                            threshold=args.threshold)
    print(f"wrote {prob_path} and {mask_path}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="iternet",
        description="Iterative refinement UNet on ODST patch datasets",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_train = sub.add_parser("train", help="train from an ODST container")
    p_train.add_argument("--data", required=True, help="ODST patch container")
    p_train.add_argument("--out", required=True, help="output directory")
    p_train.add_argument("--in-channels", dest="in_channels", type=int,
                         help="override the plane count (default: from header)")
    p_train.add_argument("--iterations", type=int, default=3)
    p_train.add_argument("--base-width", dest="base_width", type=int, default=32)
    p_train.add_argument("--lr", type=float, default=0.001)
    p_train.add_argument("--epochs", type=int, default=100)
    p_train.add_argument("--batch", type=int, default=4)
    p_train.add_argument("--seed", type=int, default=0)
    p_train.add_argument("--val-fraction", dest="val_fraction", type=float,
                         default=0.1)
    p_train.add_argument("--target-train-f1", dest="target_train_f1", type=float,
                         help="stop early once training F1 reaches this value")
    p_train.set_defaults(func=cmd_train)

    p_pred = sub.add_parser("predict", help="write probability and mask PNGs")
    p_pred.add_argument("--weights", required=True)
    p_pred.add_argument("--channels-prefix", dest="channels_prefix",
                        help="prefix of <prefix>_v1.png .. plane files")
    p_pred.add_argument("--odst", help="single-record channel container")
    p_pred.add_argument("--out", required=True, help="output directory")
    p_pred.add_argument("--stem", help="output stem (default: from input name)")
    p_pred.add_argument("--threshold", type=float, default=0.5)
    p_pred.set_defaults(func=cmd_predict)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except (ContainerError, ValueError) as exc:
        print(f"iternet {args.command}: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"iternet {args.command}: {exc}", file=sys.stderr)
        return 2


def entrypoint() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entrypoint()
