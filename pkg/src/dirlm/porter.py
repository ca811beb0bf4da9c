"""Porter's suffix-stripping stemmer.

Two variants are provided. ``"reference"`` (the default) follows the
implementation Porter distributes, whose output defines the standard
vocabulary test vectors: words of one or two letters are left alone,
step 2 rewrites ``-bli`` to ``-ble`` instead of ``-abli`` to ``-able``,
and ``-logi`` becomes ``-log``. ``"original"`` applies the rules exactly as
first published in 1980.

Input is expected in lower case; callers fold case themselves.
"""

from __future__ import annotations

from functools import lru_cache

_VOWELS = frozenset("aeiou")


def _is_cons(word: str, i: int) -> bool:
    ch = word[i]
    if ch in _VOWELS:
        return False
    if ch == "y":
        return i == 0 or not _is_cons(word, i - 1)
    return True


def _measure(stem: str) -> int:
    """Number of VC sequences in ``[C](VC){m}[V]``."""
    m = 0
    prev_vowel = False
    for i in range(len(stem)):
        cons = _is_cons(stem, i)
        if cons and prev_vowel:
            m += 1
        prev_vowel = not cons
    return m


def _has_vowel(stem: str) -> bool:
    return any(not _is_cons(stem, i) for i in range(len(stem)))


def _double_cons(word: str) -> bool:
    return len(word) >= 2 and word[-1] == word[-2] and _is_cons(word, len(word) - 1)


def _cvc(word: str) -> bool:
    if len(word) < 3:
        return False
    n = len(word)
    return (_is_cons(word, n - 3) and not _is_cons(word, n - 2) and _is_cons(word, n - 1)
            and word[-1] not in "wxy")


def _apply(word: str, rules, cond) -> str:
    # rules are ordered longest suffix first; the first match decides
    for suffix, repl in rules:
        if word.endswith(suffix):
            stem = word[: len(word) - len(suffix)]
            return stem + repl if cond(stem, suffix) else word
    return word


def _sorted_rules(pairs):
    return sorted(pairs, key=lambda p: -len(p[0]))


_STEP2_COMMON = [
    ("ational", "ate"), ("tional", "tion"), ("enci", "ence"), ("anci", "ance"), ("izer", "ize"),
    ("alli", "al"), ("entli", "ent"), ("eli", "e"), ("ousli", "ous"),
    ("ization", "ize"), ("ation", "ate"), ("ator", "ate"), ("alism", "al"), ("iveness", "ive"),
    ("fulness", "ful"), ("ousness", "ous"), ("aliti", "al"), ("iviti", "ive"), ("biliti", "ble"),
]
_STEP2 = {
    "original": _sorted_rules(_STEP2_COMMON + [("abli", "able")]),
    "reference": _sorted_rules(_STEP2_COMMON + [("bli", "ble"), ("logi", "log")]),
}
MODES = tuple(_STEP2)
_STEP3 = _sorted_rules([
    ("icate", "ic"), ("ative", ""), ("alize", "al"), ("iciti", "ic"), ("ical", "ic"), ("ful", ""), ("ness", ""),
])
_STEP4 = _sorted_rules([
    (s, "") for s in ("al", "ance", "ence", "er", "ic", "able", "ible", "ant", "ement", "ment", "ent",
                      "ion", "ou", "ism", "ate", "iti", "ous", "ive", "ize")
])


def _step1a(w: str) -> str:
    if w.endswith("sses"):
        return w[:-2]
    if w.endswith("ies"):
        return w[:-2]
    if w.endswith("ss"):
        return w
    if w.endswith("s"):
        return w[:-1]
    return w


def _step1b(w: str) -> str:
    if w.endswith("eed"):
        return w[:-1] if _measure(w[:-3]) > 0 else w
    for suffix in ("ed", "ing"):
        if w.endswith(suffix):
            stem = w[: -len(suffix)]
            if not _has_vowel(stem):
                return w
            w = stem
            if w.endswith(("at", "bl", "iz")):
                return w + "e"
            if _double_cons(w) and w[-1] not in "lsz":
                return w[:-1]
            if _measure(w) == 1 and _cvc(w):
                return w + "e"
            return w
    return w


def _step1c(w: str) -> str:
    if w.endswith("y") and _has_vowel(w[:-1]):
        return w[:-1] + "i"
    return w


def _step4_cond(stem: str, suffix: str) -> bool:
    if _measure(stem) <= 1:
        return False
    return suffix != "ion" or stem.endswith(("s", "t"))


def _step5(w: str) -> str:
    if w.endswith("e"):
        m = _measure(w[:-1])
        if m > 1 or (m == 1 and not _cvc(w[:-1])):
            w = w[:-1]
    if w.endswith("ll") and _measure(w) > 1:
        w = w[:-1]
    return w


@lru_cache(maxsize=200_000)
def stem(word: str, mode: str = "reference") -> str:
    """Stem one lower-case word."""
    if mode not in _STEP2:
        raise ValueError(f"unknown mode {mode!r}; choose from {MODES}")
    if mode == "reference" and len(word) <= 2:
        return word
    w = _step1a(word)
    w = _step1b(w)
    w = _step1c(w)
    w = _apply(w, _STEP2[mode], lambda s, _: _measure(s) > 0)
    w = _apply(w, _STEP3, lambda s, _: _measure(s) > 0)
    w = _apply(w, _STEP4, _step4_cond)
    return _step5(w)
