"""Command-line pipeline driver.

Subcommands cover the full data path: ``filter`` enhances one image,
``channels`` exports a channel stack, ``prepare`` builds an augmented patch
dataset, and ``eval`` scores prediction masks.  Every run writes its fully
resolved configuration next to its outputs as ``<output>.run.cfg`` so
results stay reproducible.

Exit codes: 0 success, 1 partial failure (some files skipped or unmatched,
report printed per file), 2 usage or configuration error.

A config file may supply any parameter flag as ``key = value`` lines
('#' starts a comment); explicit flags override file values.  Unknown keys
are rejected.  Paths inside a config file are resolved relative to the
config file's directory.
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import dataclass, fields
from pathlib import Path

from .channels import (
    ABLATION_MODES,
    VECTOR_MODES,
    ChannelConfig,
    ablation_channels,
)
from .dataset import prepare_dataset, write_channels_odst
from .filtering import FilterConfig, cascade, multi_step
from .image import CHANNEL_POLICIES, load_image, save_image
from .metrics import evaluate_dataset, to_csv, to_table

EXIT_OK = 0
EXIT_PARTIAL = 1
EXIT_USAGE = 2

IMAGE_SUFFIXES = (".png", ".pgm", ".ppm")


class ConfigError(ValueError):
    """Bad configuration file or inconsistent parameter values."""


@dataclass(frozen=True)
class RunConfig:
    """Resolved parameter set shared by all subcommands."""

    length: int = 7
    spacings: tuple[int, ...] = (1, 2, 3)
    kappa: float = 0.7
    vector_mode: str = "cos-sin"
    channel_policy: str = "green"
    ablation: str = "full"
    seed: int = 0
    patches_per_image: int = 200
    augment_per_image: int = 4
    jobs: int = 1

    def __post_init__(self):
        # Constructing the library configs runs their validation.
        self.filter_config()
        if self.vector_mode not in VECTOR_MODES:
            raise ConfigError(f"vector_mode must be one of {VECTOR_MODES}")
        if self.channel_policy not in CHANNEL_POLICIES:
            raise ConfigError(f"channel_policy must be one of {CHANNEL_POLICIES}")
        if self.ablation not in ABLATION_MODES:
            raise ConfigError(f"ablation must be one of {ABLATION_MODES}")
        if self.seed < 0:
            raise ConfigError("seed must be non-negative")
        if self.patches_per_image < 1 or self.augment_per_image < 1:
            raise ConfigError("patch and augmentation counts must be >= 1")
        if self.jobs < 1:
            raise ConfigError("jobs must be >= 1")

    def filter_config(self) -> FilterConfig:
        try:
            return FilterConfig(
                length_L=self.length, spacing_set=self.spacings, kappa=self.kappa
            )
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc

    def channel_config(self) -> ChannelConfig:
        return ChannelConfig(
            filter=self.filter_config(),
            vector_mode=self.vector_mode,
            channel_policy=self.channel_policy,
        )


def _parse_spacings(text: str) -> tuple[int, ...]:
    try:
        return tuple(int(part) for part in text.split(",") if part.strip())
    except ValueError as exc:
        raise ConfigError(f"bad spacing list {text!r}: {exc}") from exc


_PARSERS = {
    "length": int,
    "spacings": _parse_spacings,
    "kappa": float,
    "vector_mode": str,
    "channel_policy": str,
    "ablation": str,
    "seed": int,
    "patches_per_image": int,
    "augment_per_image": int,
    "jobs": int,
}

# Keys a resolved dump may carry beyond the parameters; accepted (and
# ignored) when such a file is fed back through --config.
_PROVENANCE_KEYS = frozenset(
    {"command", "input", "output", "dataset_dir", "pred", "gt", "fov", "csv",
     "format", "dump_per_spacing"}
)


def load_config_file(path: str | Path) -> dict:
    """Parse ``key = value`` lines into a parameter dict; reject unknown keys."""
    values = {}
    path = Path(path)
    for lineno, raw_line in enumerate(path.read_text().splitlines(), start=1):
        line = raw_line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{lineno}: expected 'key = value', got {raw_line!r}")
        key, _, value = line.partition("=")
        key = key.strip().replace("-", "_")
        value = value.strip()
        if key in _PROVENANCE_KEYS:
            continue
        if key not in _PARSERS:
            raise ConfigError(f"{path}:{lineno}: unknown config key {key!r}")
        try:
            values[key] = _PARSERS[key](value)
        except (ValueError, ConfigError) as exc:
            raise ConfigError(f"{path}:{lineno}: bad value for {key}: {exc}") from exc
    return values


def resolve_config(args: argparse.Namespace) -> RunConfig:
    """Defaults, overlaid by the config file, overlaid by explicit flags."""
    values: dict = {}
    if getattr(args, "config", None):
        values.update(load_config_file(args.config))
    for name in _PARSERS:
        flag_value = getattr(args, name, None)
        if flag_value is not None:
            values[name] = flag_value
    try:
        return RunConfig(**values)
    except (ConfigError, ValueError) as exc:
        raise ConfigError(str(exc)) from exc


def write_runconfig(output: str | Path, cfg: RunConfig, extra: dict) -> Path:
    """Dump the resolved run next to its output as ``<output>.run.cfg``."""
    path = Path(str(output) + ".run.cfg")
    lines = [f"{key} = {value}" for key, value in extra.items()]
    for f in fields(cfg):
        value = getattr(cfg, f.name)
        if f.name == "spacings":
            value = ",".join(str(s) for s in value)
        lines.append(f"{f.name} = {value}")
    path.write_text("\n".join(lines) + "\n")
    return path


def _ensure_parent(path: str | Path) -> None:
    Path(path).resolve().parent.mkdir(parents=True, exist_ok=True)


def cmd_filter(args) -> int:
    cfg = resolve_config(args)
    fcfg = cfg.filter_config()
    image = load_image(args.input, cfg.channel_policy)
    fused = multi_step(image, fcfg)
    out = Path(args.output)
    _ensure_parent(out)
    save_image(fused, out)
    if args.dump_per_spacing:
        for spacing in fcfg.spacing_set:
            plane = cascade(image, fcfg, spacing)
            save_image(plane, out.with_name(f"{out.stem}_S{spacing}{out.suffix}"))
    write_runconfig(out, cfg, {"command": "filter", "input": args.input,
                               "output": str(out),
                               "dump_per_spacing": args.dump_per_spacing})
    return EXIT_OK


def cmd_channels(args) -> int:
    cfg = resolve_config(args)
    image = load_image(args.input, cfg.channel_policy)
    stack = ablation_channels(image, cfg.channel_config(), cfg.ablation)
    prefix = Path(args.output_prefix)
    _ensure_parent(prefix)
    if args.format == "png":
        for k, plane in enumerate(stack, start=1):
            save_image(plane, prefix.with_name(f"{prefix.name}_v{k}.png"))
    else:
        write_channels_odst(stack, prefix.with_suffix(".odst"))
    write_runconfig(prefix, cfg, {"command": "channels", "input": args.input,
                                  "output": str(prefix), "format": args.format})
    return EXIT_OK


def _collect_pairs(dataset_dir: Path) -> tuple[list[tuple[Path, Path]], list[str]]:
    images_dir = dataset_dir / "images"
    labels_dir = dataset_dir / "labels"
    if not images_dir.is_dir() or not labels_dir.is_dir():
        raise ConfigError(
            f"{dataset_dir} must contain images/ and labels/ subdirectories"
        )
    labels = {p.stem: p for p in sorted(labels_dir.iterdir())
              if p.suffix.lower() in IMAGE_SUFFIXES}
    pairs = []
    problems = []
    for image_path in sorted(images_dir.iterdir()):
        if image_path.suffix.lower() not in IMAGE_SUFFIXES:
            continue
        label = labels.get(image_path.stem)
        if label is None:
            problems.append(f"{image_path.name}: no matching label")
            continue
        pairs.append((image_path, label))
    if not pairs:
        raise ConfigError(f"no usable image/label pairs under {dataset_dir}")
    return pairs, problems


def cmd_prepare(args) -> int:
    cfg = resolve_config(args)
    pairs, problems = _collect_pairs(Path(args.dataset_dir))
    _ensure_parent(args.output)
    manifest = prepare_dataset(
        [(str(a), str(b)) for a, b in pairs],
        args.output,
        cfg.channel_config(),
        master_seed=cfg.seed,
        augment_per_image=cfg.augment_per_image,
        patches_per_image=cfg.patches_per_image,
        ablation=cfg.ablation,
        jobs=cfg.jobs,
    )
    write_runconfig(args.output, cfg, {"command": "prepare",
                                       "dataset_dir": args.dataset_dir,
                                       "output": args.output})
    print(f"wrote {manifest['record_count']} records "
          f"({manifest['channels']} channels) to {args.output}")
    for line in problems:
        print(f"skipped {line}", file=sys.stderr)
    return EXIT_PARTIAL if problems else EXIT_OK


def cmd_eval(args) -> int:
    cfg = resolve_config(args)
    evaluation = evaluate_dataset(args.pred, args.gt, args.fov)
    csv_path = Path(args.csv)
    _ensure_parent(csv_path)
    csv_path.write_text(to_csv(evaluation))
    print(to_table(evaluation), end="")
    write_runconfig(csv_path, cfg, {"command": "eval", "pred": args.pred,
                                    "gt": args.gt, "fov": args.fov or "",
                                    "csv": str(csv_path)})
    for stem in evaluation.missing_gt:
        print(f"missing ground truth for {stem}", file=sys.stderr)
    for stem in evaluation.missing_fov:
        print(f"missing fov mask for {stem}", file=sys.stderr)
    return EXIT_OK if evaluation.complete else EXIT_PARTIAL


def _add_common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", help="key = value parameter file")
    parser.add_argument("--length", type=int, help="stick length L (default 7)")
    parser.add_argument("--spacings", type=_parse_spacings,
                        help="comma-separated inter-stick spacings (default 1,2,3)")
    parser.add_argument("--kappa", type=float,
                        help="deviation penalty weight (default 0.7)")
    parser.add_argument("--vector-mode", dest="vector_mode", choices=VECTOR_MODES,
                        help="orientation encoding (default cos-sin)")
    parser.add_argument("--channel-policy", dest="channel_policy",
                        choices=CHANNEL_POLICIES,
                        help="gray conversion for color input (default green)")
    parser.add_argument("--seed", type=int, help="master seed (default 0)")
    parser.add_argument("--jobs", type=int, help="worker processes (default 1)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="odos",
        description="Oriented stick enhancement pipeline for curvilinear structures",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_filter = sub.add_parser("filter", help="write the fused enhancement of one image")
    p_filter.add_argument("input")
    p_filter.add_argument("output")
    p_filter.add_argument("--dump-per-spacing", action="store_true",
                          help="also write each single-spacing cascade plane")
    _add_common(p_filter)
    p_filter.set_defaults(func=cmd_filter)

    p_channels = sub.add_parser("channels", help="export the channel stack of one image")
    p_channels.add_argument("input")
    p_channels.add_argument("output_prefix")
    p_channels.add_argument("--format", choices=("png", "odst"), default="png",
                            help="per-plane PNGs or a single-record container")
    p_channels.add_argument("--ablation", choices=ABLATION_MODES,
                            help="channel subset (default full)")
    _add_common(p_channels)
    p_channels.set_defaults(func=cmd_channels)

    p_prepare = sub.add_parser(
        "prepare",
        help="build an augmented 128x128 patch dataset from images/ and labels/",
    )
    p_prepare.add_argument("dataset_dir")
    p_prepare.add_argument("output", help="output .odst container path")
    p_prepare.add_argument("--ablation", choices=ABLATION_MODES,
                           help="channel subset (default full)")
    p_prepare.add_argument("--patches-per-image", dest="patches_per_image", type=int,
                           help="patches per source image (default 200)")
    p_prepare.add_argument("--augment-per-image", dest="augment_per_image", type=int,
                           help="augmented copies per source image (default 4)")
    _add_common(p_prepare)
    p_prepare.set_defaults(func=cmd_prepare)

    p_eval = sub.add_parser("eval", help="score prediction masks against ground truth")
    p_eval.add_argument("pred", help="directory of prediction masks")
    p_eval.add_argument("gt", help="directory of ground-truth masks")
    p_eval.add_argument("--fov", help="directory of field-of-view masks")
    p_eval.add_argument("--csv", default="metrics.csv", help="CSV output path")
    _add_common(p_eval)
    p_eval.set_defaults(func=cmd_eval)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except (ConfigError, ValueError) as exc:
        print(f"odos {args.command}: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"odos {args.command}: {exc}", file=sys.stderr)
        return EXIT_USAGE


def entrypoint() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entrypoint()
