"""Flat binary checkpoints: named float64 arrays plus the vocabulary size.

Layout (all integers little-endian u32): an 8-byte magic, a format version,
the vocabulary size, then one record per parameter: name length, UTF-8 name,
rank, the dims, and the row-major float64 payload.  Records are read until
EOF; truncation anywhere raises CheckpointError.
"""
from __future__ import annotations

import struct

import numpy as np

from .errors import CheckpointError

MAGIC = b"TSPARSE\x00"
VERSION = 1
_U32 = struct.Struct("<I")


def save_checkpoint(path: str, model) -> None:
    with open(path, "wb") as fh:
        fh.write(MAGIC)
        fh.write(_U32.pack(VERSION))
        fh.write(_U32.pack(model.vocab.size))
        for name, param in model.named_parameters().items():
            encoded = name.encode("utf-8")
            fh.write(_U32.pack(len(encoded)))
            fh.write(encoded)
            # asarray, not ascontiguousarray: the latter promotes 0-d to (1,)
            arr = np.asarray(param.data, dtype=np.float64)
            fh.write(_U32.pack(arr.ndim))
            for dim in arr.shape:
                fh.write(_U32.pack(dim))
            fh.write(arr.tobytes())


def read_checkpoint(path: str) -> tuple[int, dict[str, np.ndarray]]:
    """Raw contents: (vocab_size, name -> array)."""
    with open(path, "rb") as fh:
        blob = fh.read()
    if blob[:len(MAGIC)] != MAGIC:
        raise CheckpointError(f"{path}: bad magic, not a checkpoint")
    pos = len(MAGIC)
    version, pos = _read_u32(blob, pos, path, "version")
    if version != VERSION:
        raise CheckpointError(f"{path}: unsupported format version {version}")
    vocab_size, pos = _read_u32(blob, pos, path, "vocab size")
    arrays: dict[str, np.ndarray] = {}
    while pos < len(blob):
        name_len, pos = _read_u32(blob, pos, path, "name length")
        name = _take(blob, pos, name_len, path, "name").decode("utf-8")
        pos += name_len
        rank, pos = _read_u32(blob, pos, path, "rank")
        shape = []
        for _ in range(rank):
            dim, pos = _read_u32(blob, pos, path, f"dims of {name}")
            shape.append(dim)
        count = int(np.prod(shape, dtype=np.int64)) if shape else 1
        payload = _take(blob, pos, count * 8, path, f"payload of {name}")
        pos += count * 8
        arrays[name] = np.frombuffer(payload, dtype="<f8").reshape(shape).copy()
    return vocab_size, arrays


def load_checkpoint(path: str, model) -> None:
    """Copy a checkpoint into an existing model; any mismatch in vocabulary,
    parameter names, or shapes raises CheckpointError."""
    vocab_size, arrays = read_checkpoint(path)
    if vocab_size != model.vocab.size:
        raise CheckpointError(
            f"{path}: checkpoint vocabulary {vocab_size} vs model {model.vocab.size}")
    params = model.named_parameters()
    if set(arrays) != set(params):
        missing = sorted(set(params) - set(arrays))
        extra = sorted(set(arrays) - set(params))
        raise CheckpointError(
            f"{path}: parameter names do not match (missing {missing}, unexpected {extra})")
    for name, param in params.items():
        if arrays[name].shape != param.data.shape:
            raise CheckpointError(
                f"{path}: {name} has shape {arrays[name].shape}, model wants {param.data.shape}")
    for name, param in params.items():
        param.data = arrays[name]


def _read_u32(blob: bytes, pos: int, path: str, what: str) -> tuple[int, int]:
    raw = _take(blob, pos, 4, path, what)
    return _U32.unpack(raw)[0], pos + 4


def _take(blob: bytes, pos: int, count: int, path: str, what: str) -> bytes:
    if pos + count > len(blob):
        raise CheckpointError(f"{path}: truncated while reading {what}")
    return blob[pos:pos + count]
