"""Seeded augmentation, patch extraction, and the ODST patch container.

Augmentation draws are counter-based: every parameter set is a pure
function of (seed, draw index) through a Philox generator, so dataset
builds are reproducible bit-for-bit at any worker count.  Channels are
always computed after geometric warping; warping finished channel planes
would smear orientation encodings without re-indexing them.

Container layout (ODST, all integers little-endian):

    magic "ODST" (4 bytes) | version u32 = 1 | record count u64 |
    channels u32 | height u32 | width u32 | reserved u32 = 0

then per record: the image planes as 32-bit IEEE-754 floats, channel-major
row-major, the label as one plane in the same encoding (values 0.0/1.0),
then a CRC32 (u32) of the record payload.  Patch datasets always use
128 x 128; a JSON sidecar manifest records provenance (source files,
master seed, configuration).
"""

from __future__ import annotations

import json
import struct
import zlib
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass
from pathlib import Path

import numpy as np
from scipy import ndimage

from .channels import ChannelConfig, ablation_channels
from .image import as_gray, as_mask, load_image, load_mask

PATCH_SIZE = 128

MAGIC = b"ODST"
VERSION = 1
_HEADER = struct.Struct("<4sIQIIII")  # magic, version, count, channels, h, w, reserved
_CRC = struct.Struct("<I")

ROTATION_RANGE = (-180.0, 180.0)
SHEAR_RANGE = (-0.1, 0.1)
SHIFT_RANGE = (-0.1, 0.1)
ZOOM_RANGE = (0.9, 1.1)


class DatasetFormatError(ValueError):
    """Container violation; carries the byte offset or record index."""

    def __init__(self, message: str, *, offset: int | None = None,
                 record_index: int | None = None):
        super().__init__(message)
        self.offset = offset
        self.record_index = record_index


@dataclass(frozen=True)
class AugmentParams:
    """One geometric augmentation draw."""

    rotation_deg: float
    shear: float
    flip_h: bool
    flip_v: bool
    shift: tuple[float, float]  # fraction of width/height
    zoom: float
    seed: int

    def __post_init__(self):
        if not ROTATION_RANGE[0] <= self.rotation_deg <= ROTATION_RANGE[1]:
            raise ValueError(f"rotation {self.rotation_deg} outside {ROTATION_RANGE}")
        if not SHEAR_RANGE[0] <= self.shear <= SHEAR_RANGE[1]:
            raise ValueError(f"shear {self.shear} outside {SHEAR_RANGE}")
        for s in self.shift:
            if not SHIFT_RANGE[0] <= s <= SHIFT_RANGE[1]:
                raise ValueError(f"shift {self.shift} outside {SHIFT_RANGE}")
        if not ZOOM_RANGE[0] <= self.zoom <= ZOOM_RANGE[1]:
            raise ValueError(f"zoom {self.zoom} outside {ZOOM_RANGE}")

    @classmethod
    def identity(cls, seed: int = 0) -> "AugmentParams":
        return cls(0.0, 0.0, False, False, (0.0, 0.0), 1.0, seed)


def _philox(seed: int, index: int, stream: int) -> np.random.Generator:
    if not 0 <= seed < 2 ** 64:
        raise ValueError("seed must be a non-negative 64-bit integer")
    if not 0 <= index < 2 ** 64:
        raise ValueError("draw index must be a non-negative 64-bit integer")
    key = np.array([seed, index], dtype=np.uint64)
    counter = np.array([0, 0, 0, stream], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key, counter=counter))


def draw_params(seed: int, index: int) -> AugmentParams:
    """Deterministic augmentation draw for (seed, index).

    Uniform within each range; flips are independent fair bits.  The draw
    order is fixed: rotation, shear, flip_h, flip_v, shift x/y, zoom.
    """
    gen = _philox(seed, index, stream=0)
    rotation = gen.uniform(*ROTATION_RANGE)
    shear = gen.uniform(*SHEAR_RANGE)
    flip_h = bool(gen.integers(0, 2))
    flip_v = bool(gen.integers(0, 2))
    shift = (gen.uniform(*SHIFT_RANGE), gen.uniform(*SHIFT_RANGE))
    zoom = gen.uniform(*ZOOM_RANGE)
    return AugmentParams(rotation, shear, flip_h, flip_v, shift, zoom, seed)


def _forward_matrix(params: AugmentParams) -> np.ndarray:
    th = np.radians(params.rotation_deg)
    rot = np.array([[np.cos(th), -np.sin(th)], [np.sin(th), np.cos(th)]])
    sh = np.array([[1.0, params.shear], [0.0, 1.0]])
    zm = np.array([[params.zoom, 0.0], [0.0, params.zoom]])
    m = rot @ sh @ zm
    # Quarter-turn rotations must map the pixel grid onto itself exactly;
    # snap entries that are within float noise of 0 or +-1.
    for target in (0.0, 1.0, -1.0):
        near = np.abs(m - target) < 1e-12
        m[near] = target
    return m


def warp(image, params: AugmentParams, interpolation: str = "bilinear") -> np.ndarray:
    """Apply zoom, shear, rotation (in that order) about the image center,
    then the fractional shift, then flips.

    ``bilinear`` for intensity images, ``nearest`` for label planes.
    Regions mapped from outside the frame are filled with 0.
    """
    if interpolation not in ("bilinear", "nearest"):
        raise ValueError(f"interpolation must be 'bilinear' or 'nearest'")
    img = as_gray(image)
    h, w = img.shape
    if (
        params.rotation_deg == 0.0
        and params.shear == 0.0
        and params.zoom == 1.0
        and params.shift == (0.0, 0.0)
    ):
        out = img.copy()
    else:
        m = _forward_matrix(params)
        inv = np.linalg.inv(m)
        # scipy indexes (row, col) = (y, x); permute the xy matrix.
        inv_yx = np.array([[inv[1, 1], inv[1, 0]], [inv[0, 1], inv[0, 0]]])
        center_yx = np.array([(h - 1) / 2.0, (w - 1) / 2.0])
        shift_yx = np.array([params.shift[1] * h, params.shift[0] * w])
        offset = center_yx - inv_yx @ (center_yx + shift_yx)
        out = ndimage.affine_transform(
            img,
            inv_yx,
            offset=offset,
            order=1 if interpolation == "bilinear" else 0,
            mode="constant",
            cval=0.0,
            prefilter=False,
        )
    if params.flip_h:
        out = out[:, ::-1]
    if params.flip_v:
        out = out[::-1, :]
    return np.ascontiguousarray(out)


@dataclass
class PatchSource:
    """A warped image/label pair with its channel stack, ready for cropping."""

    channels: np.ndarray  # (C, H, W) float64
    label: np.ndarray  # (H, W) uint8
    params: AugmentParams
    source_id: str = ""


@dataclass(frozen=True)
class Provenance:
    source_id: str
    params: AugmentParams | None
    origin: tuple[int, int]  # (x, y) of the patch's top-left corner


@dataclass
class PatchRecord:
    """One 128 x 128 training patch: float32 channel planes plus binary label."""

    image: np.ndarray  # (C, 128, 128) float32
    label: np.ndarray  # (128, 128) uint8
    provenance: Provenance | None = None

    def __post_init__(self):
        img = np.asarray(self.image, dtype=np.float32)
        if img.ndim != 3 or img.shape[1:] != (PATCH_SIZE, PATCH_SIZE):
            raise ValueError(f"patch image must be (C, {PATCH_SIZE}, {PATCH_SIZE})")
        self.image = img
        self.label = as_mask(self.label)
        if self.label.shape != (PATCH_SIZE, PATCH_SIZE):
            raise ValueError(f"patch label must be {PATCH_SIZE} x {PATCH_SIZE}")


def augment_pair(raw, gt, params: AugmentParams, cfg: ChannelConfig,
                 *, ablation: str = "full", source_id: str = "") -> PatchSource:
    """Warp a raw/label pair, then compute channels on the warped raw image.

    The label is warped with nearest-neighbor sampling and re-binarized at
    0.5, so it stays strictly binary.
    """
    raw = as_gray(raw)
    gt = as_mask(gt)
    if raw.shape != gt.shape:
        raise ValueError(f"raw {raw.shape} and label {gt.shape} sizes differ")
    warped_raw = warp(raw, params, interpolation="bilinear")
    warped_gt = warp(gt.astype(np.float64), params, interpolation="nearest")
    label = (warped_gt > 0.5).astype(np.uint8)
    channels = ablation_channels(warped_raw, cfg, ablation)
    return PatchSource(channels=channels, label=label, params=params,
                       source_id=source_id)


def extract_patches(src: PatchSource, count: int, seed: int,
                    *, index: int = 0) -> list[PatchRecord]:
    """Crop ``count`` congruent image/label patches at seeded uniform origins.

    Windows always lie fully inside the source.  Two calls with the same
    (source, count, seed, index) yield identical patch lists.
    """
    h, w = src.label.shape
    if h < PATCH_SIZE or w < PATCH_SIZE:
        raise ValueError(
            f"source {w} x {h} smaller than the {PATCH_SIZE}-pixel patch window"
        )
    gen = _philox(seed, index, stream=1)
    records = []
    for _ in range(count):
        x0 = int(gen.integers(0, w - PATCH_SIZE, endpoint=True))
        y0 = int(gen.integers(0, h - PATCH_SIZE, endpoint=True))
        records.append(
            PatchRecord(
                image=src.channels[:, y0 : y0 + PATCH_SIZE, x0 : x0 + PATCH_SIZE],
                label=src.label[y0 : y0 + PATCH_SIZE, x0 : x0 + PATCH_SIZE],
                provenance=Provenance(src.source_id, src.params, (x0, y0)),
            )
        )
    return records


def write_dataset(records: list[PatchRecord], path: str | Path) -> None:
    """Serialize records into an ODST container (see module docstring)."""
    if records:
        channels = records[0].image.shape[0]
        for k, rec in enumerate(records):
            if rec.image.shape[0] != channels:
                raise ValueError(
                    f"record {k} has {rec.image.shape[0]} channels, expected {channels}"
                )
    else:
        channels = 0
    with open(path, "wb") as fh:
        fh.write(_HEADER.pack(MAGIC, VERSION, len(records), channels,
                              PATCH_SIZE, PATCH_SIZE, 0))
        for rec in records:
            payload = rec.image.astype("<f4").tobytes()
            payload += rec.label.astype("<f4").tobytes()
            fh.write(payload)
            fh.write(_CRC.pack(zlib.crc32(payload) & 0xFFFFFFFF))


def read_dataset(path: str | Path) -> list[PatchRecord]:
    """Read an ODST container back into records (provenance lives in the
    sidecar manifest, not the container, and comes back as ``None``).

    Raises :class:`DatasetFormatError` for bad magic/version or truncation
    (with the failing byte offset) and checksum mismatches (with the record
    index).
    """
    blob = Path(path).read_bytes()
    if len(blob) < _HEADER.size:
        raise DatasetFormatError(
            f"truncated header: {len(blob)} bytes, need {_HEADER.size}",
            offset=len(blob),
        )
    magic, version, count, channels, height, width, _ = _HEADER.unpack_from(blob, 0)
    if magic != MAGIC:
        raise DatasetFormatError(f"bad magic {magic!r}", offset=0)
    if version != VERSION:
        raise DatasetFormatError(f"unsupported version {version}", offset=4)
    if count and (height, width) != (PATCH_SIZE, PATCH_SIZE):
        raise DatasetFormatError(
            f"unexpected patch size {width} x {height}", offset=16
        )
    plane = height * width * 4
    rec_size = channels * plane + plane + _CRC.size
    offset = _HEADER.size
    records = []
    for k in range(count):
        if offset + rec_size > len(blob):
            raise DatasetFormatError(
                f"truncated record {k}: need {offset + rec_size} bytes, "
                f"file has {len(blob)}",
                offset=len(blob), record_index=k,
            )
        payload = blob[offset : offset + rec_size - _CRC.size]
        (stored_crc,) = _CRC.unpack_from(blob, offset + rec_size - _CRC.size)
        if zlib.crc32(payload) & 0xFFFFFFFF != stored_crc:
            raise DatasetFormatError(
                f"checksum mismatch in record {k}", record_index=k,
                offset=offset,
            )
        image = np.frombuffer(payload[: channels * plane], dtype="<f4")
        image = image.reshape(channels, height, width).copy()
        label_f = np.frombuffer(payload[channels * plane :], dtype="<f4")
        label_f = label_f.reshape(height, width)
        if not np.isin(label_f, (0.0, 1.0)).all():
            raise DatasetFormatError(
                f"record {k} label plane has non-binary values", record_index=k,
                offset=offset,
            )
        records.append(PatchRecord(image=image, label=label_f.astype(np.uint8)))
        offset += rec_size
    return records


def write_channels_odst(channels, path: str | Path) -> None:
    """Write one full-size channel stack as a single-record container.

    Inspection export: the record's label plane is all zeros.  Header
    height/width follow the stack instead of the 128-pixel patch size.
    """
    stack = np.asarray(channels, dtype="<f4")
    if stack.ndim != 3:
        raise ValueError(f"channel stack must be (C, H, W), got {stack.shape}")
    c, h, w = stack.shape
    with open(path, "wb") as fh:
        fh.write(_HEADER.pack(MAGIC, VERSION, 1, c, h, w, 0))
        payload = stack.tobytes() + np.zeros((h, w), dtype="<f4").tobytes()
        fh.write(payload)
        fh.write(_CRC.pack(zlib.crc32(payload) & 0xFFFFFFFF))


def read_channels_odst(path: str | Path) -> np.ndarray:
    """Read back a single-record channel container as a (C, H, W) float32 stack."""
    blob = Path(path).read_bytes()
    if len(blob) < _HEADER.size:
        raise DatasetFormatError(
            f"truncated header: {len(blob)} bytes, need {_HEADER.size}",
            offset=len(blob),
        )
    magic, version, count, channels, height, width, _ = _HEADER.unpack_from(blob, 0)
    if magic != MAGIC:
        raise DatasetFormatError(f"bad magic {magic!r}", offset=0)
    if version != VERSION:
        raise DatasetFormatError(f"unsupported version {version}", offset=4)
    if count != 1:
        raise DatasetFormatError(f"expected one record, found {count}", offset=8)
    plane = height * width * 4
    need = _HEADER.size + channels * plane + plane + _CRC.size
    if len(blob) < need:
        raise DatasetFormatError(
            f"truncated record: need {need} bytes, file has {len(blob)}",
            offset=len(blob), record_index=0,
        )
    payload = blob[_HEADER.size : need - _CRC.size]
    (stored_crc,) = _CRC.unpack_from(blob, need - _CRC.size)
    if zlib.crc32(payload) & 0xFFFFFFFF != stored_crc:
        raise DatasetFormatError("checksum mismatch in record 0",
                                 record_index=0, offset=_HEADER.size)
    stack = np.frombuffer(payload[: channels * plane], dtype="<f4")
    return stack.reshape(channels, height, width).copy()


@dataclass(frozen=True)
class _PrepareTask:
    image_path: str
    label_path: str
    source_id: str
    draw_index: int
    n_patches: int
    master_seed: int
    cfg: ChannelConfig
    ablation: str
    channel_policy: str


def _prepare_one(task: _PrepareTask) -> list[PatchRecord]:
    raw = load_image(task.image_path, task.channel_policy)
    gt = load_mask(task.label_path)
    params = draw_params(task.master_seed, task.draw_index)
    src = augment_pair(raw, gt, params, task.cfg, ablation=task.ablation,
                       source_id=task.source_id)
    return extract_patches(src, task.n_patches, task.master_seed,
                           index=task.draw_index)


def prepare_dataset(
    pairs: list[tuple[str | Path, str | Path]],
    out_path: str | Path,
    cfg: ChannelConfig,
    *,
    master_seed: int,
    augment_per_image: int = 4,
    patches_per_image: int = 200,
    ablation: str = "full",
    jobs: int = 1,
) -> dict:
    """Build an augmented patch dataset from (image, label) path pairs.

    Each source image contributes ``augment_per_image`` warped copies whose
    patch counts sum to ``patches_per_image``.  Output record order is fixed
    by (image index, copy index) regardless of ``jobs``; rebuilding with the
    same seed yields a byte-identical container.  Returns the manifest dict
    (also written as a JSON sidecar next to ``out_path``).
    """
    if augment_per_image < 1:
        raise ValueError("augment_per_image must be >= 1")
    if patches_per_image < 1:
        raise ValueError("patches_per_image must be >= 1")
    tasks = []
    sources = []
    for k, (image_path, label_path) in enumerate(pairs):
        source_id = Path(image_path).stem
        base = patches_per_image // augment_per_image
        extra = patches_per_image % augment_per_image
        copies = []
        for a in range(augment_per_image):
            draw_index = k * augment_per_image + a
            n_patches = base + (1 if a < extra else 0)
            if n_patches == 0:
                continue
            tasks.append(
                _PrepareTask(
                    image_path=str(image_path),
                    label_path=str(label_path),
                    source_id=source_id,
                    draw_index=draw_index,
                    n_patches=n_patches,
                    master_seed=master_seed,
                    cfg=cfg,
                    ablation=ablation,
                    channel_policy=cfg.channel_policy,
                )
            )
            copies.append({"draw_index": draw_index, "patches": n_patches})
        sources.append(
            {"source_id": source_id, "image": str(image_path),
             "label": str(label_path), "copies": copies}
        )

    records: list[PatchRecord] = []
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            for chunk in pool.map(_prepare_one, tasks):
                records.extend(chunk)
    else:
        for task in tasks:
            records.extend(_prepare_one(task))

    out_path = Path(out_path)
    write_dataset(records, out_path)
    manifest = {
        "container": out_path.name,
        "record_count": len(records),
        "channels": int(records[0].image.shape[0]) if records else 0,
        "patch_size": PATCH_SIZE,
        "master_seed": master_seed,
        "augment_per_image": augment_per_image,
        "patches_per_image": patches_per_image,
        "ablation": ablation,
        "vector_mode": cfg.vector_mode,
        "channel_policy": cfg.channel_policy,
        "filter": asdict(cfg.filter),
        "sources": sources,
    }
    manifest_path = out_path.with_suffix(".manifest.json")
    manifest_path.write_text(json.dumps(manifest, indent=2) + "\n")
    return manifest
