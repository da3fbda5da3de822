"""Versioned binary envelope for trained models.

Layout: 8-byte magic (6 id bytes + format version u16), a type tag, a
JSON manifest, then raw little-endian float32 blobs in manifest order.
Loading rejects any magic/version mismatch.
"""

from __future__ import annotations

import json
import struct
from pathlib import Path

import numpy as np

from .core import ValidationError

_MAGIC = b"M2AMDL"
_VERSION = 1


def save_model_file(path: str | Path, type_tag: str, manifest: dict,
                    arrays: list[np.ndarray]) -> None:
    names = manifest.get("arrays")
    if names is None or len(names) != len(arrays):
        raise ValueError("manifest['arrays'] must describe every blob")
    payload = json.dumps(manifest, sort_keys=True).encode("utf-8")
    tag = type_tag.encode("ascii")
    out = bytearray()
    out += _MAGIC
    out += struct.pack("<H", _VERSION)
    out += struct.pack("<B", len(tag)) + tag
    out += struct.pack("<I", len(payload)) + payload
    for entry, arr in zip(names, arrays):
        blob = np.ascontiguousarray(arr, dtype="<f4")
        if list(blob.shape) != list(entry["shape"]):
            raise ValueError(f"array {entry['name']}: shape {blob.shape} "
                             f"!= manifest {entry['shape']}")
        out += blob.tobytes()
    Path(path).parent.mkdir(parents=True, exist_ok=True)
    Path(path).write_bytes(bytes(out))


def load_model_file(path: str | Path, expect_tag: str | None = None):
    """Returns (type_tag, manifest, arrays)."""
    data = Path(path).read_bytes()
    if len(data) < 8 or data[:6] != _MAGIC:
        raise ValidationError(f"{path}: not a model file (bad magic)")
    (version,) = struct.unpack_from("<H", data, 6)
    if version != _VERSION:
        raise ValidationError(
            f"{path}: model format version {version} unsupported "
            f"(expected {_VERSION})")
    off = 8
    (tag_len,) = struct.unpack_from("<B", data, off)
    off += 1
    tag = data[off:off + tag_len].decode("ascii")
    off += tag_len
    (mlen,) = struct.unpack_from("<I", data, off)
    off += 4
    manifest = json.loads(data[off:off + mlen].decode("utf-8"))
    off += mlen
    if expect_tag is not None and tag != expect_tag:
        raise ValidationError(
            f"{path}: model type {tag!r}, expected {expect_tag!r}")
    arrays = []
    for entry in manifest["arrays"]:
        shape = tuple(entry["shape"])
        count = int(np.prod(shape)) if shape else 1
        arr = np.frombuffer(data, dtype="<f4", count=count, offset=off)
        off += count * 4
        arrays.append(arr.reshape(shape).copy())
    if off != len(data):
        raise ValidationError(f"{path}: trailing bytes after weight blobs")
    return tag, manifest, arrays
