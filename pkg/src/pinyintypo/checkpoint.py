"""Binary checkpoint format.

Layout: 6-byte magic, little-endian uint32 header length, UTF-8 JSON header
(format version, model configuration, ordered tensor manifest of name and
shape), then raw little-endian float64 tensor data in manifest order. The
header is serialized with sorted keys and fixed separators so that
save -> load -> save reproduces files byte for byte.
"""

from __future__ import annotations

import json
import struct

import numpy as np

from .errors import CheckpointError
from .model import ModelConfig, Parameters

MAGIC = b"KNPTC1"
FORMAT_VERSION = 1


def save_checkpoint(params: Parameters, config: ModelConfig, path) -> None:
    tensors = params.tensors()
    header = {
        "format_version": FORMAT_VERSION,
        "config": config.to_dict(),
        "manifest": [[name, list(arr.shape)] for name, arr in tensors.items()],
    }
    blob = json.dumps(header, sort_keys=True, separators=(",", ":")).encode("utf-8")
    with open(path, "wb") as f:
        f.write(MAGIC)
        f.write(struct.pack("<I", len(blob)))
        f.write(blob)
        for arr in tensors.values():
            f.write(np.ascontiguousarray(arr, dtype="<f8").tobytes())


def load_checkpoint(path) -> tuple[Parameters, ModelConfig]:
    """Read a checkpoint; the configuration always comes from the file."""
    with open(path, "rb") as f:
        data = f.read()
    if len(data) < len(MAGIC) + 4 or data[: len(MAGIC)] != MAGIC:
        raise CheckpointError(
            f"{path}: not a recognized checkpoint (expected magic {MAGIC!r})"
        )
    (header_len,) = struct.unpack_from("<I", data, len(MAGIC))
    header_start = len(MAGIC) + 4
    header_end = header_start + header_len
    if len(data) < header_end:
        raise CheckpointError(f"{path}: truncated header")
    try:
        header = json.loads(data[header_start:header_end].decode("utf-8"))
    except (ValueError, UnicodeDecodeError) as e:
        raise CheckpointError(f"{path}: unreadable header: {e}") from None
    version = header.get("format_version")
    if version != FORMAT_VERSION:
        raise CheckpointError(
            f"{path}: format version {version!r} not supported (expected {FORMAT_VERSION})"
        )
    try:
        config = ModelConfig.from_dict(header["config"])
        manifest = header["manifest"]
    except (KeyError, TypeError) as e:
        raise CheckpointError(f"{path}: malformed header: {e}") from None
    expected = Parameters.shapes(config)
    names = [entry[0] for entry in manifest]
    if names != list(expected):
        raise CheckpointError(f"{path}: tensor manifest does not match the config")
    arrays = {}
    offset = header_end
    for name, shape in manifest:
        shape = tuple(int(s) for s in shape)
        if shape != expected[name]:
            raise CheckpointError(
                f"{path}: tensor {name} has shape {shape}, expected {expected[name]}"
            )
        nbytes = 8 * int(np.prod(shape))
        if offset + nbytes > len(data):
            raise CheckpointError(f"{path}: truncated tensor data at {name}")
        arrays[name] = (
            np.frombuffer(data, dtype="<f8", count=nbytes // 8, offset=offset)
            .reshape(shape)
            .copy()
        )
        offset += nbytes
    if offset != len(data):
        raise CheckpointError(f"{path}: {len(data) - offset} trailing bytes")
    return Parameters(**arrays), config
