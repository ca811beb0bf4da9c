import os
import random
import sys

import pytest
from hypothesis import settings

sys.path.insert(0, os.path.dirname(__file__))

settings.register_profile("default", deadline=None, max_examples=60)
settings.load_profile("default")

ALPHABET = ["a", "b", "c", "d", "e", "news", "home", "2024"]
STEM_WORDS = ["news", "News", "article", "articles", "Article", "running", "run", "dogs", "dog", "a", "b", "c"]


def random_paths(rng: random.Random, n_paths: int, words=ALPHABET, max_depth: int = 4):
    paths = []
    for _ in range(n_paths):
        depth = rng.randint(1, max_depth)
        paths.append(tuple(rng.choice(words) for _ in range(depth)))
    return paths


def random_site(rng: random.Random, max_nodes: int = 50, words=ALPHABET, max_depth: int = 4):
    """Unique paths whose prefix closure has at most ``max_nodes`` nodes."""
    nodes = set()
    paths = []
    while True:
        p = tuple(rng.choice(words) for _ in range(rng.randint(1, max_depth)))
        closure = {p[:i] for i in range(1, len(p) + 1)}
        if len(nodes | closure) + 1 > max_nodes:
            break
        nodes |= closure
        if p not in paths:
            paths.append(p)
        if rng.random() < 0.05:
            break
    return paths


def random_corpus(seed, n_domains=None, words=STEM_WORDS):
    from dirlm.dataset import Corpus
    rng = random.Random(seed)
    n = n_domains or rng.randint(2, 6)
    sites = {}
    for i in range(n):
        sites[f"d{i}.org"] = list(dict.fromkeys(random_paths(rng, rng.randint(0, 12), words, 4)))
    return Corpus(sites)


@pytest.fixture
def rng():
    return random.Random(1234)


@pytest.fixture
def example_tree_paths():
    """Six paths forming a small example site tree."""
    return [("news",), ("home",), ("register",), ("news", "2024"), ("news", "today"), ("news", "weather")]


@pytest.fixture(scope="session")
def overfit_ab():
    """A model trained to convergence on the single path a/b."""
    from dirlm.dataset import Corpus
    from dirlm.lm import HyperParams, fit
    corpus = Corpus({"s.org": [("a", "b")]})
    hp = HyperParams(embedding_size=16, n_layers=1, min_freq=1, dropout_rate=0.0, learning_rate=1e-2,
                     max_epochs=300, patience=300)
    return fit(corpus, corpus, hp)


# --------------------------------------------------------------------------
# acceptance criteria report: one PASS/FAIL line per criterion

_CRITERIA = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(n, title): acceptance criterion number and title")


def pytest_runtest_makereport(item, call):
    marker = item.get_closest_marker("criterion")
    if marker is None or call.when not in ("setup", "call"):
        return
    n, title = marker.args
    failed = call.excinfo is not None
    if call.when == "setup" and not failed:
        return
    detail = dict(item.user_properties).get("detail", "")
    if failed:
        detail = call.excinfo.exconly().splitlines()[0][:160]
    _CRITERIA[n] = (not failed, title, detail)


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(_CRITERIA):
        ok, title, detail = _CRITERIA[n]
        line = f"{'PASS' if ok else 'FAIL'} criterion {n}: {title}"
        terminalreporter.write_line(line + (f" ({detail})" if detail else ""))
