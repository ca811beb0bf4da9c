"""Word-level LSTM language model in plain NumPy.

Embedding -> dropout -> stacked LSTM -> dropout -> linear -> softmax.
The hidden size equals the embedding size. Gates are packed in the order
input, forget, cell candidate, output; each layer keeps one weight matrix
of shape ``(in + hidden, 4 * hidden)`` whose top rows act on the layer
input and bottom rows on the previous hidden state.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass, field, replace
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from ..url_model import PathSeq
from .vocab import PAD, SPECIALS, Vocabulary, encode

Params = Dict[str, np.ndarray]


@dataclass(frozen=True)
class HyperParams:
    max_depth: int = 10
    min_freq: int = 3
    embedding_size: int = 128
    n_layers: int = 2
    dropout_rate: float = 0.2
    learning_rate: float = 1e-3
    batch_size: int = 64
    patience: int = 10
    max_epochs: int = 200
    seed: int = 0

    def __post_init__(self):
        for name in ("max_depth", "min_freq", "embedding_size", "batch_size", "patience"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")
        if self.n_layers < 0 or self.max_epochs < 0 or self.learning_rate <= 0:
            raise ValueError("n_layers and max_epochs must be >= 0, learning_rate > 0")
        if not 0 <= self.dropout_rate < 1:
            raise ValueError("dropout_rate must lie in [0, 1)")

    def to_dict(self) -> dict:
        return asdict(self)


def param_names(n_layers: int) -> List[str]:
    names = ["embedding"]
    for layer in range(n_layers):
        names += [f"lstm{layer}.W", f"lstm{layer}.b"]
    return names + ["proj.W", "proj.b"]


def init_params(vocab_size: int, embedding_size: int, n_layers: int, seed: int = 0,
                dtype=np.float32) -> Params:
    rng = np.random.default_rng(seed)
    e = h = embedding_size
    k = 1.0 / np.sqrt(h)
    params = {"embedding": rng.standard_normal((vocab_size, e))}
    for layer in range(n_layers):
        params[f"lstm{layer}.W"] = rng.uniform(-k, k, (e + h, 4 * h))
        b = rng.uniform(-k, k, 4 * h)
        b[h:2 * h] += 1.0  # forget gate starts open
        params[f"lstm{layer}.b"] = b
    params["proj.W"] = rng.uniform(-k, k, (h, vocab_size))
    params["proj.b"] = np.zeros(vocab_size)
    return {name: arr.astype(dtype) for name, arr in params.items()}


def _sigmoid(x):
    return 0.5 * (1.0 + np.tanh(0.5 * x))


def n_layers_of(params: Params) -> int:
    return sum(1 for k in params if k.endswith(".W") and k.startswith("lstm"))


def forward(params: Params, X: np.ndarray, dropout: float = 0.0, rng: Optional[np.random.Generator] = None):
    """Run the network on a ``(batch, time)`` id matrix.

    Returns ``(logits, cache)``; logits have shape ``(batch * time, V)``.
    Dropout is active only when ``rng`` is given and ``dropout > 0``; it is
    inverted so evaluation needs no rescaling.
    """
    B, T = X.shape
    emb = params["embedding"]
    dtype = emb.dtype
    drop = rng is not None and dropout > 0
    keep = 1.0 - dropout

    x = emb[X]
    mask_in = None
    if drop:
        mask_in = (rng.random(x.shape) < keep).astype(dtype) / dtype.type(keep)
        x = x * mask_in

    layers = []
    inp = x
    for layer in range(n_layers_of(params)):
        W, b = params[f"lstm{layer}.W"], params[f"lstm{layer}.b"]
        din = inp.shape[2]
        H = W.shape[1] // 4
        Wx, Wh = W[:din], W[din:]
        xproj = (inp.reshape(B * T, din) @ Wx + b).reshape(B, T, 4 * H)
        gates = np.empty((B, T, 4 * H), dtype=dtype)
        cs = np.empty((B, T, H), dtype=dtype)
        hs = np.empty((B, T, H), dtype=dtype)
        h = np.zeros((B, H), dtype=dtype)
        c = np.zeros((B, H), dtype=dtype)
        for t in range(T):
            z = xproj[:, t] + h @ Wh
            g = gates[:, t]
            g[:, :2 * H] = _sigmoid(z[:, :2 * H])
            g[:, 2 * H:3 * H] = np.tanh(z[:, 2 * H:3 * H])
            g[:, 3 * H:] = _sigmoid(z[:, 3 * H:])
            c = g[:, H:2 * H] * c + g[:, :H] * g[:, 2 * H:3 * H]
            h = g[:, 3 * H:] * np.tanh(c)
            cs[:, t] = c
            hs[:, t] = h
        layers.append((inp, gates, cs, hs))
        inp = hs

    out = inp
    mask_out = None
    if drop:
        mask_out = (rng.random(out.shape) < keep).astype(dtype) / dtype.type(keep)
        out = out * mask_out
    out2d = out.reshape(B * T, out.shape[2])
    logits = out2d @ params["proj.W"] + params["proj.b"]
    cache = (X, mask_in, layers, mask_out, out2d)
    return logits, cache


def backward(params: Params, cache, dlogits: np.ndarray) -> Params:
    """Back-propagation through time for :func:`forward`."""
    X, mask_in, layers, mask_out, out2d = cache
    B, T = X.shape
    grads: Params = {
        "proj.W": out2d.T @ dlogits,
        "proj.b": dlogits.sum(axis=0),
    }
    dinp = (dlogits @ params["proj.W"].T).reshape(B, T, -1)
    if mask_out is not None:
        dinp = dinp * mask_out

    for layer in reversed(range(len(layers))):
        inp, gates, cs, hs = layers[layer]
        W = params[f"lstm{layer}.W"]
        din = inp.shape[2]
        H = W.shape[1] // 4
        Wx, Wh = W[:din], W[din:]
        dz_all = np.empty_like(gates)
        dh_next = np.zeros((B, H), dtype=W.dtype)
        dc_next = np.zeros((B, H), dtype=W.dtype)
        for t in reversed(range(T)):
            g = gates[:, t]
            i, f, gc, o = g[:, :H], g[:, H:2 * H], g[:, 2 * H:3 * H], g[:, 3 * H:]
            tc = np.tanh(cs[:, t])
            c_prev = cs[:, t - 1] if t > 0 else 0.0
            dh = dinp[:, t] + dh_next
            dc = dh * o * (1.0 - tc * tc) + dc_next
            dz = dz_all[:, t]
            dz[:, :H] = dc * gc * i * (1.0 - i)
            dz[:, H:2 * H] = dc * c_prev * f * (1.0 - f)
            dz[:, 2 * H:3 * H] = dc * i * (1.0 - gc * gc)
            dz[:, 3 * H:] = dh * tc * o * (1.0 - o)
            dc_next = dc * f
            dh_next = dz @ Wh.T
        h_prev = np.concatenate([np.zeros((B, 1, H), dtype=hs.dtype), hs[:, :-1]], axis=1)
        dz2d = dz_all.reshape(B * T, 4 * H)
        grads[f"lstm{layer}.W"] = np.vstack([inp.reshape(B * T, din).T @ dz2d, h_prev.reshape(B * T, H).T @ dz2d])
        grads[f"lstm{layer}.b"] = dz2d.sum(axis=0)
        dinp = (dz2d @ Wx.T).reshape(B, T, din)

    if mask_in is not None:
        dinp = dinp * mask_in
    demb = np.zeros_like(params["embedding"])
    np.add.at(demb, X.ravel(), dinp.reshape(B * T, -1))
    grads["embedding"] = demb
    return grads


def log_softmax(logits: np.ndarray) -> np.ndarray:
    shifted = logits - logits.max(axis=-1, keepdims=True)
    return shifted - np.log(np.exp(shifted).sum(axis=-1, keepdims=True))


def softmax(logits: np.ndarray) -> np.ndarray:
    shifted = logits - logits.max(axis=-1, keepdims=True)
    e = np.exp(shifted)
    return e / e.sum(axis=-1, keepdims=True)


def masked_cross_entropy(logits: np.ndarray, Y: np.ndarray) -> Tuple[float, np.ndarray, int]:
    """Mean negative log-likelihood over non-PAD targets.

    Returns ``(loss, dlogits, n_tokens)``.
    """
    y = Y.ravel()
    mask = y != PAD
    n = int(mask.sum())
    if n == 0:
        return 0.0, np.zeros_like(logits), 0
    logp = log_softmax(logits)
    rows = np.arange(len(y))
    loss = -float(logp[rows[mask], y[mask]].sum()) / n
    dlogits = np.exp(logp)
    dlogits[rows, y] -= 1.0
    dlogits *= (mask / n).astype(logits.dtype)[:, None]
    return loss, dlogits, n


def loss_and_grads(params: Params, X, Y, dropout=0.0, rng=None):
    logits, cache = forward(params, X, dropout, rng)
    loss, dlogits, n = masked_cross_entropy(logits, Y)
    return loss, backward(params, cache, dlogits), n


def pad_batch(pairs: Sequence[Tuple[List[int], List[int]]]) -> Tuple[np.ndarray, np.ndarray]:
    """Right-pad ``(inputs, targets)`` pairs with PAD into two id matrices."""
    T = max(len(x) for x, _ in pairs)
    X = np.full((len(pairs), T), PAD, dtype=np.int64)
    Y = np.full((len(pairs), T), PAD, dtype=np.int64)
    for row, (x, y) in enumerate(pairs):
        X[row, :len(x)] = x
        Y[row, :len(y)] = y
    return X, Y


@dataclass(frozen=True)
class LanguageModel:
    vocab: Vocabulary
    hparams: HyperParams
    params: Params = field(repr=False)

    @classmethod
    def initialise(cls, vocab: Vocabulary, hparams: HyperParams, dtype=np.float32) -> "LanguageModel":
        params = init_params(len(vocab), hparams.embedding_size, hparams.n_layers, hparams.seed, dtype)
        return cls(vocab, hparams, params).frozen()

    def frozen(self) -> "LanguageModel":
        for arr in self.params.values():
            arr.flags.writeable = False
        return self

    def with_params(self, params: Params) -> "LanguageModel":
        return replace(self, params=params).frozen()

    def astype(self, dtype) -> "LanguageModel":
        return self.with_params({k: v.astype(dtype) for k, v in self.params.items()})

    @property
    def n_params(self) -> int:
        return sum(int(v.size) for v in self.params.values())

    def distribution(self, prefix_ids: Sequence[int]) -> np.ndarray:
        """Eval-mode next-token distribution after ``prefix_ids``."""
        return forward_distribution(self, prefix_ids, train_mode=False)


def forward_distribution(model: LanguageModel, prefix_ids: Sequence[int], train_mode: bool = False,
                         rng: Optional[np.random.Generator] = None) -> np.ndarray:
    """Probability vector over the vocabulary for the token after the prefix."""
    if not prefix_ids:
        raise ValueError("prefix must start with SOS")
    X = np.asarray(prefix_ids, dtype=np.int64)[None, :]
    if train_mode:
        rng = rng if rng is not None else np.random.default_rng()
        logits, _ = forward(model.params, X, model.hparams.dropout_rate, rng)
    else:
        logits, _ = forward(model.params, X)
    return softmax(logits[-1].astype(np.float64))


def predict_topk(model: LanguageModel, prefix: PathSeq, k: int) -> List[Tuple[str, float]]:
    """The ``k`` most probable next directory names after ``prefix``.

    Special tokens are never returned. Results are sorted by probability,
    then name. Prefixes at or beyond the training depth yield nothing.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    if len(prefix) >= model.hparams.max_depth:
        return []
    probs = model.distribution(encode(prefix, model.vocab, model.hparams.max_depth))
    words = probs[len(SPECIALS):]
    if k < len(words):
        # over-select so ties at the cut are ordered by name
        cut = np.partition(words, len(words) - k)[len(words) - k]
        idx = np.flatnonzero(words >= cut)
    else:
        idx = np.arange(len(words))
    vocab = model.vocab.id_to_token
    ranked = sorted(((vocab[i + len(SPECIALS)], float(words[i])) for i in idx), key=lambda wp: (-wp[1], wp[0]))
    return ranked[:k]


class UnknownWord(KeyError):
    pass


def embedding_similarity(model: LanguageModel, word: str, n: int = 10) -> List[Tuple[str, float]]:
    """Nearest vocabulary words to ``word`` by cosine similarity of embeddings."""
    if word not in model.vocab:
        raise UnknownWord(word)
    emb = model.params["embedding"].astype(np.float64)
    norms = np.linalg.norm(emb, axis=1)
    norms[norms == 0] = 1.0
    q = model.vocab.id(word)
    sims = emb @ emb[q] / (norms * norms[q])
    out = [(model.vocab.id_to_token[i], float(sims[i]))
           for i in range(len(SPECIALS), len(sims)) if i != q]
    out.sort(key=lambda ws: (-ws[1], ws[0]))
    return out[:n]
