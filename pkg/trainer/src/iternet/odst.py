"""Reader for the ODST patch container.

Implemented from the documented byte layout alone so this package stays
decoupled from the producing pipeline.  Layout (little-endian): magic
"ODST", version u32 = 1, record count u64, channels u32, height u32,
width u32, reserved u32; then per record the image planes as float32
channel-major row-major, one float32 label plane of 0.0/1.0 values, and a
CRC32 of the record payload.
"""

from __future__ import annotations

import struct
import zlib
from pathlib import Path

import numpy as np

MAGIC = b"ODST"
VERSION = 1
_HEADER = struct.Struct("<4sIQIIII")
_CRC = struct.Struct("<I")


class ContainerError(ValueError):
    """Malformed container; carries the byte offset or record index."""

    def __init__(self, message, *, offset=None, record_index=None):
        super().__init__(message)
        self.offset = offset
        self.record_index = record_index


def _read_header(blob: bytes):
    if len(blob) < _HEADER.size:
        raise ContainerError(
            f"truncated header: {len(blob)} bytes", offset=len(blob)
        )
    magic, version, count, channels, height, width, _ = _HEADER.unpack_from(blob, 0)
    if magic != MAGIC:
        raise ContainerError(f"bad magic {magic!r}", offset=0)
    if version != VERSION:
        raise ContainerError(f"unsupported version {version}", offset=4)
    return count, channels, height, width


def _read_records(blob: bytes, count, channels, height, width):
    plane = height * width * 4
    rec_size = (channels + 1) * plane + _CRC.size
    images = np.empty((count, channels, height, width), dtype=np.float32)
    labels = np.empty((count, height, width), dtype=np.float32)
    offset = _HEADER.size
    for k in range(count):
        if offset + rec_size > len(blob):
            raise ContainerError(
                f"truncated record {k}", offset=len(blob), record_index=k
            )
        payload = blob[offset : offset + rec_size - _CRC.size]
        (crc,) = _CRC.unpack_from(blob, offset + rec_size - _CRC.size)
        if zlib.crc32(payload) & 0xFFFFFFFF != crc:
            raise ContainerError(
                f"checksum mismatch in record {k}", record_index=k, offset=offset
            )
        images[k] = np.frombuffer(payload[: channels * plane], dtype="<f4").reshape(
            channels, height, width
        )
        labels[k] = np.frombuffer(payload[channels * plane :], dtype="<f4").reshape(
            height, width
        )
        offset += rec_size
    return images, labels


def read_patch_dataset(path: str | Path) -> tuple[np.ndarray, np.ndarray]:
    """Load a patch container: (N, C, H, W) float32 images, (N, H, W) labels.

    Labels must be strictly 0.0/1.0.
    """
    blob = Path(path).read_bytes()
    count, channels, height, width = _read_header(blob)
    images, labels = _read_records(blob, count, channels, height, width)
    if count and not np.isin(labels, (0.0, 1.0)).all():
        raise ContainerError("labels are not binary")
    return images, labels


def read_channel_stack(path: str | Path) -> np.ndarray:
    """Load a single-record channel container as a (C, H, W) float32 stack."""
    blob = Path(path).read_bytes()
    count, channels, height, width = _read_header(blob)
    if count != 1:
        raise ContainerError(f"expected one record, found {count}", offset=8)
    images, _ = _read_records(blob, count, channels, height, width)
    return images[0]
