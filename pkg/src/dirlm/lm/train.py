from __future__ import annotations

import itertools
import logging
import math
from dataclasses import dataclass, field, replace
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from ..dataset import Corpus
from .model import HyperParams, LanguageModel, Params, forward, loss_and_grads, masked_cross_entropy, pad_batch
from .vocab import EOS, SOS, SPECIALS, Vocabulary, build_vocabulary, training_pairs

log = logging.getLogger(__name__)

ADAM_BETAS = (0.9, 0.999)
ADAM_EPS = 1e-8


class EmptyTrainingSet(ValueError):
    pass


class Adam:
    def __init__(self, params: Params, lr: float = 1e-3, betas=ADAM_BETAS, eps: float = ADAM_EPS):
        self.lr = lr
        self.b1, self.b2 = betas
        self.eps = eps
        self.t = 0
        self.m = {k: np.zeros_like(v) for k, v in params.items()}
        self.v = {k: np.zeros_like(v) for k, v in params.items()}

    def step(self, params: Params, grads: Params) -> None:
        self.t += 1
        c1 = 1.0 - self.b1 ** self.t
        c2 = 1.0 - self.b2 ** self.t
        for k, g in grads.items():
            m, v = self.m[k], self.v[k]
            m *= self.b1
            m += (1.0 - self.b1) * g
            v *= self.b2
            v += (1.0 - self.b2) * g * g
            params[k] -= (self.lr / c1) * m / (np.sqrt(v / c2) + self.eps)


@dataclass
class EpochRecord:
    epoch: int
    train_loss: float
    val_loss: float


@dataclass
class TrainingReport:
    """Loss history. Epoch 0 holds the losses of the initial weights."""

    epochs: List[EpochRecord] = field(default_factory=list)
    best_epoch: int = 0
    best_val_loss: float = math.inf
    stop_reason: str = "max_epochs"
    hparams: Optional[dict] = None
    optimizer: dict = field(default_factory=lambda: {"name": "adam", "betas": list(ADAM_BETAS), "eps": ADAM_EPS})

    def to_csv(self) -> str:
        lines = ["epoch,train_loss,val_loss"]
        lines += [f"{r.epoch},{r.train_loss:.8f},{r.val_loss:.8f}" for r in self.epochs]
        return "\n".join(lines) + "\n"


def corpus_pairs(corpus: Corpus, vocab: Vocabulary, max_depth: int):
    pairs = []
    for domain in corpus.sites:
        pairs.extend(training_pairs(corpus.sites[domain], vocab, max_depth))
    return pairs


def evaluate_loss(params: Params, pairs, batch_size: int = 512) -> float:
    """Eval-mode mean cross-entropy per target token."""
    total, count = 0.0, 0
    for start in range(0, len(pairs), batch_size):
        X, Y = pad_batch(pairs[start:start + batch_size])
        logits, _ = forward(params, X)
        loss, _, n = masked_cross_entropy(logits, Y)
        total += loss * n
        count += n
    return total / count if count else math.nan


def _copy(params: Params) -> Params:
    return {k: np.array(v, copy=True) for k, v in params.items()}


def train(model: LanguageModel, train_corpus: Corpus, val_corpus: Corpus, hparams: Optional[HyperParams] = None,
          progress=None) -> Tuple[LanguageModel, TrainingReport]:
    """Fit ``model`` by next-directory cross-entropy with Adam.

    After every epoch the validation loss is measured; training stops once
    it has not improved for ``patience`` epochs and the best weights
    (possibly the initial ones) are restored.
    """
    h = hparams or model.hparams
    vocab = model.vocab
    pairs = corpus_pairs(train_corpus, vocab, h.max_depth)
    if not pairs:
        raise EmptyTrainingSet("training corpus produced no sequences")
    val_pairs = corpus_pairs(val_corpus, vocab, h.max_depth)
    if not val_pairs:
        log.warning("empty validation set; early stopping watches the training loss")
        val_pairs = pairs

    rng = np.random.default_rng(h.seed)
    params = _copy(model.params)
    opt = Adam(params, h.learning_rate)
    report = TrainingReport(hparams=h.to_dict())

    val0 = evaluate_loss(params, val_pairs)
    report.epochs.append(EpochRecord(0, evaluate_loss(params, pairs), val0))
    best_params, report.best_val_loss, report.best_epoch = _copy(params), val0, 0

    for epoch in range(1, h.max_epochs + 1):
        order = rng.permutation(len(pairs))
        total, count = 0.0, 0
        for start in range(0, len(order), h.batch_size):
            X, Y = pad_batch([pairs[i] for i in order[start:start + h.batch_size]])
            loss, grads, n = loss_and_grads(params, X, Y, h.dropout_rate, rng)
            opt.step(params, grads)
            total += loss * n
            count += n
        val = evaluate_loss(params, val_pairs)
        report.epochs.append(EpochRecord(epoch, total / count, val))
        if progress:
            progress(report.epochs[-1])
        if val < report.best_val_loss:
            best_params, report.best_val_loss, report.best_epoch = _copy(params), val, epoch
        elif epoch - report.best_epoch >= h.patience:
            report.stop_reason = "early_stopping"
            break
    return model.with_params(best_params), report


def fit(train_corpus: Corpus, val_corpus: Corpus, hparams: HyperParams, progress=None):
    """Build the vocabulary from the training corpus, initialise and train."""
    vocab = build_vocabulary(train_corpus.all_paths(), hparams.min_freq)
    model = LanguageModel.initialise(vocab, hparams)
    return train(model, train_corpus, val_corpus, hparams, progress)


# --------------------------------------------------------------------------
# model selection

FULL_GRID = {
    "max_depth": [5, 10],
    "min_freq": [3, 5],
    "embedding_size": [128, 256, 512],
    "n_layers": [2, 3, 4],
    "dropout_rate": [0.2, 0.4, 0.6],
}
DESK_GRID = {
    "max_depth": [5, 10],
    "min_freq": [3, 5],
    "embedding_size": [128],
    "n_layers": [2],
    "dropout_rate": [0.2, 0.4],
}


def expand_grid(grid: Dict[str, list], base: HyperParams = HyperParams()) -> List[HyperParams]:
    keys = list(grid)
    return [replace(base, **dict(zip(keys, values))) for values in itertools.product(*(grid[k] for k in keys))]


@dataclass
class GridResult:
    hparams: HyperParams
    report: TrainingReport
    n_params: int
    model: Optional[LanguageModel] = field(default=None, repr=False)


def grid_search(train_corpus: Corpus, val_corpus: Corpus, grid: Sequence[HyperParams], progress=None):
    """Train every configuration and pick the lowest best validation loss.

    Ties go to the smaller model, then to the earlier grid entry. Returns
    ``(best GridResult, all results in grid order)``.
    """
    if not grid:
        raise ValueError("empty grid")
    results = []
    for h in grid:
        model, report = fit(train_corpus, val_corpus, h, progress)
        results.append(GridResult(h, report, model.n_params, model))
    best = min(enumerate(results), key=lambda ir: (ir[1].report.best_val_loss, ir[1].n_params, ir[0]))[1]
    return best, results


# --------------------------------------------------------------------------
# gradient checking

@dataclass
class GradCheck:
    max_rel_error: float
    per_group: Dict[str, float]
    skipped: bool = False


# Central differences at step 1e-5 in float64 carry ~1e-10 absolute round-off,
# so magnitudes below the floor are compared on an absolute scale.
REL_ERROR_FLOOR = 1e-6


def _rel_error(a: np.ndarray, b: np.ndarray, floor: float = REL_ERROR_FLOOR) -> np.ndarray:
    return np.abs(a - b) / np.maximum(np.abs(a) + np.abs(b), floor)


def gradient_check(model: LanguageModel, batch, step: float = 1e-5, max_entries: Optional[int] = None,
                   seed: int = 0) -> GradCheck:
    """Compare back-propagated gradients with central finite differences.

    Runs in float64 with dropout off. ``batch`` is a list of
    ``(inputs, targets)`` pairs. ``max_entries`` limits how many entries of
    each parameter group are probed (all by default).
    """
    if not batch:
        return GradCheck(0.0, {}, skipped=True)
    params = {k: np.array(v, dtype=np.float64) for k, v in model.params.items()}
    X, Y = pad_batch(batch)
    _, grads, _ = loss_and_grads(params, X, Y)

    def loss_at() -> float:
        logits, _ = forward(params, X)
        return masked_cross_entropy(logits, Y)[0]

    rng = np.random.default_rng(seed)
    per_group = {}
    for name, p in params.items():
        flat = p.reshape(-1)
        idx = np.arange(flat.size)
        if max_entries is not None and flat.size > max_entries:
            idx = np.sort(rng.choice(flat.size, max_entries, replace=False))
        numeric = np.empty(len(idx))
        for j, i in enumerate(idx):
            orig = flat[i]
            flat[i] = orig + step
            up = loss_at()
            flat[i] = orig - step
            down = loss_at()
            flat[i] = orig
            numeric[j] = (up - down) / (2 * step)
        analytic = grads[name].reshape(-1)[idx]
        per_group[name] = float(_rel_error(analytic, numeric).max())
    return GradCheck(max(per_group.values()), per_group)


def gradcheck_case(vocab_size: int = 50, embedding_size: int = 16, n_layers: int = 2, seed: int = 0,
                   n_sequences: int = 4, max_len: int = 6):
    """A random double-precision model and batch sized for gradient checking.

    ``vocab_size`` counts the four special tokens.
    """
    if vocab_size <= len(SPECIALS):
        raise ValueError("vocab_size must exceed the number of special tokens")
    vocab = Vocabulary([f"w{i}" for i in range(vocab_size - len(SPECIALS))])
    hp = HyperParams(embedding_size=embedding_size, n_layers=n_layers, min_freq=1, dropout_rate=0.0, seed=seed)
    model = LanguageModel.initialise(vocab, hp, dtype=np.float64)
    rng = np.random.default_rng(seed)
    batch = []
    for _ in range(n_sequences):
        length = int(rng.integers(1, max_len + 1))
        ids = [SOS] + [int(t) for t in rng.integers(len(SPECIALS), vocab_size, length)] + [EOS]
        batch.append((ids[:-1], ids[1:]))
    return model, batch
