"""Single-file model checkpoints.

Layout (all integers little-endian)::

    offset  size  content
    0       8     magic  b"DIRLMCK\\0"
    8       4     u32    format version (currently 1)
    12      8     u64    header length H in bytes
    20      H     UTF-8 JSON header
    20+H    ...   tensor data, concatenated in header order

The JSON header holds ``vocab`` (the full id-to-token list, specials
first), ``min_freq``, ``hparams`` and ``tensors``, a list of
``{name, dtype, shape, offset, nbytes}`` entries. ``dtype`` is a NumPy
little-endian type string such as ``"<f4"`` and ``offset`` counts from the
start of the tensor data. Tensors are stored C-contiguous.
"""

from __future__ import annotations

import json
import struct

import numpy as np

from .model import HyperParams, LanguageModel, param_names
from .vocab import SPECIALS, Vocabulary

MAGIC = b"DIRLMCK\0"
VERSION = 1
_PREFIX = struct.Struct("<8sIQ")


class CheckpointError(ValueError):
    pass


def dumps(model: LanguageModel) -> bytes:
    tensors, blobs, offset = [], [], 0
    for name in param_names(model.hparams.n_layers):
        arr = np.ascontiguousarray(model.params[name])
        arr = arr.astype(arr.dtype.newbyteorder("<"), copy=False)
        raw = arr.tobytes()
        tensors.append({"name": name, "dtype": arr.dtype.str, "shape": list(arr.shape), "offset": offset,
                        "nbytes": len(raw)})
        blobs.append(raw)
        offset += len(raw)
    header = {
        "vocab": model.vocab.id_to_token,
        "min_freq": model.vocab.min_freq,
        "hparams": model.hparams.to_dict(),
        "tensors": tensors,
    }
    head = json.dumps(header, sort_keys=True, separators=(",", ":")).encode("utf-8")
    return _PREFIX.pack(MAGIC, VERSION, len(head)) + head + b"".join(blobs)


def loads(data: bytes) -> LanguageModel:
    if len(data) < _PREFIX.size:
        raise CheckpointError("truncated checkpoint")
    magic, version, head_len = _PREFIX.unpack_from(data)
    if magic != MAGIC:
        raise CheckpointError("not a model checkpoint")
    if version != VERSION:
        raise CheckpointError(f"unsupported checkpoint version {version}")
    start = _PREFIX.size + head_len
    if len(data) < start:
        raise CheckpointError("truncated checkpoint header")
    header = json.loads(data[_PREFIX.size:start].decode("utf-8"))
    tokens = header["vocab"]
    if tuple(tokens[:len(SPECIALS)]) != SPECIALS:
        raise CheckpointError("vocabulary does not start with the special tokens")
    vocab = Vocabulary(tokens[len(SPECIALS):], header["min_freq"])
    hparams = HyperParams(**header["hparams"])
    params = {}
    for spec in header["tensors"]:
        lo = start + spec["offset"]
        hi = lo + spec["nbytes"]
        if hi > len(data):
            raise CheckpointError(f"tensor {spec['name']} runs past end of file")
        arr = np.frombuffer(data[lo:hi], dtype=np.dtype(spec["dtype"])).reshape(spec["shape"])
        params[spec["name"]] = arr.astype(arr.dtype.newbyteorder("="))
    if set(params) != set(param_names(hparams.n_layers)):
        raise CheckpointError("tensor set does not match the hyperparameters")
    return LanguageModel(vocab, hparams, params).frozen()


def save(model: LanguageModel, path) -> None:
    with open(path, "wb") as fh:
        fh.write(dumps(model))


def load(path) -> LanguageModel:
    with open(path, "rb") as fh:
        return loads(fh.read())
