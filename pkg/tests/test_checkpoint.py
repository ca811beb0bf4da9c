import struct

import numpy as np
import pytest

from dirlm.lm import HyperParams, LanguageModel, Vocabulary
from dirlm.lm import checkpoint


def _model(n_layers=2, dtype=np.float32):
    vocab = Vocabulary(["news", "about", "Über"], min_freq=3)
    return LanguageModel.initialise(vocab, HyperParams(embedding_size=6, n_layers=n_layers, seed=3), dtype)


@pytest.mark.parametrize("n_layers", [0, 1, 3])
@pytest.mark.parametrize("dtype", [np.float32, np.float64])
def test_roundtrip(tmp_path, n_layers, dtype):
    model = _model(n_layers, dtype)
    path = tmp_path / "m.ckpt"
    checkpoint.save(model, path)
    loaded = checkpoint.load(path)
    assert loaded.vocab == model.vocab and loaded.vocab.min_freq == 3
    assert loaded.hparams == model.hparams
    for k, v in model.params.items():
        assert loaded.params[k].dtype == v.dtype and np.array_equal(loaded.params[k], v)
    assert checkpoint.dumps(loaded) == path.read_bytes()


def test_layout_prefix():
    data = checkpoint.dumps(_model())
    magic, version, head_len = struct.unpack_from("<8sIQ", data)
    assert magic == b"DIRLMCK\0" and version == 1
    import json
    header = json.loads(data[20:20 + head_len])
    assert header["vocab"][:4] == ["<unk>", "<pad>", "<sos>", "<eos>"]
    total = sum(t["nbytes"] for t in header["tensors"])
    assert len(data) == 20 + head_len + total


@pytest.mark.parametrize("mutate, message", [
    (lambda d: b"NOTACKPT" + d[8:], "not a model"),
    (lambda d: d[:8] + struct.pack("<I", 9) + d[12:], "version"),
    (lambda d: d[:-4], "past end"),
    (lambda d: d[:10], "truncated"),
])
def test_corrupt_files(mutate, message):
    data = checkpoint.dumps(_model())
    with pytest.raises(checkpoint.CheckpointError, match=message):
        checkpoint.loads(mutate(data))
