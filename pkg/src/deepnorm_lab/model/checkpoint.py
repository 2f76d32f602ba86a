"""Flat binary checkpoint codec.

Layout: ``b"DNLB"``, little-endian u32 format version, u32 header length, a
UTF-8 JSON header ``{"config": ..., "tensors": [{"name", "shape"}, ...]}`` and
then every tensor as little-endian f64 in header order.
"""

from __future__ import annotations

import json
import struct
from pathlib import Path

import numpy as np

from deepnorm_lab.config.loader import validate_model
from deepnorm_lab.config.models import ModelConfig
from deepnorm_lab.model.transformer import TransformerModel, build_model
from deepnorm_lab.runtime.errors import InputError

CHECKPOINT_MAGIC = b"DNLB"
CHECKPOINT_VERSION = 1
_PREFIX = struct.Struct("<4sII")


def encode_checkpoint(model: TransformerModel) -> bytes:
    params = model.parameters()
    header = {
        "config": model.config.model_dump(mode="json"),
        "tensors": [{"name": name, "shape": list(tensor.shape)} for name, tensor in params],
    }
    header_bytes = json.dumps(header, sort_keys=True).encode("utf-8")
    chunks = [_PREFIX.pack(CHECKPOINT_MAGIC, CHECKPOINT_VERSION, len(header_bytes)), header_bytes]
    chunks.extend(np.ascontiguousarray(tensor.data, dtype="<f8").tobytes() for _, tensor in params)
    return b"".join(chunks)


def decode_checkpoint(payload: bytes) -> TransformerModel:
    """Rebuild a model from :func:`encode_checkpoint` output.

    Raises:
        InputError: On a bad magic, unsupported version, malformed header or
            truncated payload.
        ConfigValidationError: If the embedded config no longer validates.
    """
    if len(payload) < _PREFIX.size:
        raise InputError("checkpoint is shorter than its prefix")
    magic, version, header_len = _PREFIX.unpack_from(payload)
    if magic != CHECKPOINT_MAGIC:
        raise InputError(f"not a checkpoint (magic {magic!r})")
    if version != CHECKPOINT_VERSION:
        raise InputError(f"unsupported checkpoint version {version}")

    offset = _PREFIX.size
    try:
        header = json.loads(payload[offset : offset + header_len].decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise InputError(f"checkpoint header is not valid JSON: {exc}") from exc
    offset += header_len
    if not isinstance(header, dict) or not isinstance(header.get("tensors"), list):
        raise InputError("checkpoint header needs a 'tensors' list")
    if "config" not in header:
        raise InputError("checkpoint header has no 'config'")

    config = validate_model(ModelConfig, header["config"])

    state: dict[str, np.ndarray] = {}
    for entry in header["tensors"]:
        try:
            name = str(entry["name"])
            shape = tuple(int(extent) for extent in entry["shape"])
        except (KeyError, TypeError, ValueError) as exc:
            raise InputError(f"malformed tensor entry in checkpoint header: {entry!r}") from exc
        count = int(np.prod(shape, dtype=np.int64))
        end = offset + 8 * count
        if end > len(payload):
            raise InputError(f"checkpoint truncated inside tensor {name}")
        raw = np.frombuffer(payload, dtype="<f8", count=count, offset=offset)
        state[name] = raw.reshape(shape).astype(np.float64)
        offset = end
    if offset != len(payload):
        raise InputError(f"{len(payload) - offset} trailing bytes after the last tensor")

    model = build_model(config)
    model.load_state_dict(state)
    return model


def save_checkpoint(model: TransformerModel, path: str | Path) -> Path:
    target = Path(path)
    target.parent.mkdir(parents=True, exist_ok=True)
    target.write_bytes(encode_checkpoint(model))
    return target


def load_checkpoint(path: str | Path) -> TransformerModel:
    source = Path(path)
    if not source.is_file():
        raise InputError(f"checkpoint not found: {source}")
    return decode_checkpoint(source.read_bytes())
