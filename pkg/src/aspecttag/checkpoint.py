"""Flat binary checkpoint archive.

Layout (all integers little-endian)::

    b"ATCK"  u32 format_version  u32 header_length  header (UTF-8 JSON)
    then, per tensor:
    u16 name_length  name  u8 ndim  u32 dims[ndim]  f64 data (row-major)

The header carries the model config, label list, vocabulary (in row order)
and free-form metadata, so a checkpoint is self-describing.
"""

from __future__ import annotations

import hashlib
import json
import struct

import numpy as np

from .corpus import TagScheme
from .models import ModelConfig, Tagger
from .numkernel import Parameter

MAGIC = b"ATCK"
FORMAT_VERSION = 1


class CheckpointError(ValueError):
    pass


def dumps(model, meta=None):
    vocab = sorted(model.vocab, key=model.vocab.get)
    header = {
        "format_version": FORMAT_VERSION,
        "config": model.config.to_dict(),
        "labels": list(model.scheme.labels),
        "vocab": vocab,
        "tensors": [{"name": n, "shape": list(p.shape)} for n, p in model.params.items()],
        "meta": meta or {},
    }
    raw = json.dumps(header, ensure_ascii=False).encode("utf-8")
    parts = [MAGIC, struct.pack("<II", FORMAT_VERSION, len(raw)), raw]
    for name, p in model.params.items():
        bname = name.encode("utf-8")
        parts.append(struct.pack("<H", len(bname)) + bname)
        parts.append(struct.pack("<B", p.data.ndim) + struct.pack(f"<{p.data.ndim}I", *p.shape))
        parts.append(np.ascontiguousarray(p.data, dtype="<f8").tobytes())
    return b"".join(parts)


def loads(data):
    """Returns ``(model, meta)``."""
    if data[:4] != MAGIC:
        raise CheckpointError("not a checkpoint (bad magic)")
    version, hlen = struct.unpack_from("<II", data, 4)
    if version != FORMAT_VERSION:
        raise CheckpointError(f"unsupported checkpoint version {version}")
    off = 12
    header = json.loads(data[off:off + hlen].decode("utf-8"))
    off += hlen
    params = {}
    for _ in header["tensors"]:
        (nlen,) = struct.unpack_from("<H", data, off)
        off += 2
        name = data[off:off + nlen].decode("utf-8")
        off += nlen
        (ndim,) = struct.unpack_from("<B", data, off)
        off += 1
        shape = struct.unpack_from(f"<{ndim}I", data, off)
        off += 4 * ndim
        count = int(np.prod(shape)) if ndim else 1
        arr = np.frombuffer(data, dtype="<f8", count=count, offset=off).reshape(shape)
        off += 8 * count
        params[name] = Parameter(arr.astype(np.float64), name)
    if off != len(data):
        raise CheckpointError(f"{len(data) - off} trailing bytes after last tensor")
    config = ModelConfig.from_dict(header["config"])
    scheme = TagScheme(config.scheme_mode, header["labels"])
    vocab = {w: i for i, w in enumerate(header["vocab"])}
    return Tagger(config, params, vocab, scheme), header.get("meta", {})


def save(model, path, meta=None):
    data = dumps(model, meta)
    with open(path, "wb") as fh:
        fh.write(data)
    return hashlib.sha256(data).hexdigest()


def load(path):
    with open(path, "rb") as fh:
        return loads(fh.read())


def file_hash(path):
    with open(path, "rb") as fh:
        return hashlib.sha256(fh.read()).hexdigest()
