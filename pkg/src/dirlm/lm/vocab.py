from __future__ import annotations

from collections import Counter
from typing import Iterable, List, Sequence, Tuple

from ..url_model import PathSeq

SPECIALS = ("<unk>", "<pad>", "<sos>", "<eos>")
UNK, PAD, SOS, EOS = range(4)


class Vocabulary:
    """Bijection between directory names and integer ids.

    Ids 0-3 are reserved for UNK, PAD, SOS and EOS. Corpus words follow in
    order of decreasing frequency, ties broken lexicographically.
    """

    def __init__(self, words: Sequence[str], min_freq: int = 1):
        self.min_freq = min_freq
        self.id_to_token: List[str] = list(SPECIALS)
        for w in words:
            if w in SPECIALS:
                continue
            self.id_to_token.append(w)
        self.token_to_id = {t: i for i, t in enumerate(self.id_to_token)}
        if len(self.token_to_id) != len(self.id_to_token):
            raise ValueError("duplicate tokens in vocabulary")

    def __len__(self):
        return len(self.id_to_token)

    def __contains__(self, word):
        return word in self.token_to_id and self.token_to_id[word] >= len(SPECIALS)

    def __eq__(self, other):
        return isinstance(other, Vocabulary) and self.id_to_token == other.id_to_token

    def id(self, word: str) -> int:
        i = self.token_to_id.get(word, UNK)
        return UNK if i < len(SPECIALS) else i

    def words(self) -> List[str]:
        return self.id_to_token[len(SPECIALS):]


def build_vocabulary(paths: Iterable[PathSeq], min_freq: int = 1) -> Vocabulary:
    """Keep directory names occurring at least ``min_freq`` times."""
    counts = Counter(seg for p in paths for seg in p)
    kept = sorted((w for w, n in counts.items() if n >= min_freq), key=lambda w: (-counts[w], w))
    return Vocabulary(kept, min_freq)


def encode(path: PathSeq, vocab: Vocabulary, max_depth: int) -> List[int]:
    """``[SOS]`` followed by the ids of the first ``max_depth`` names."""
    return [SOS] + [vocab.id(s) for s in path[:max_depth]]


def training_pairs(site_paths: Sequence[PathSeq], vocab: Vocabulary, max_depth: int) -> List[Tuple[List[int], List[int]]]:
    """Next-token ``(inputs, targets)`` pairs for the paths of one site.

    EOS is the final target only for leaf directories: paths no other path
    of the same site extends, and which were not truncated at ``max_depth``.
    """
    interior = {p[:i] for p in site_paths for i in range(1, len(p))}
    pairs = []
    for p in site_paths:
        if not p:
            continue
        full = encode(p, vocab, max_depth)
        if len(p) <= max_depth and p not in interior:
            full.append(EOS)
        pairs.append((full[:-1], full[1:]))
    return pairs
