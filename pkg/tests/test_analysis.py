import random
from collections import Counter

import pytest
from hypothesis import given
from hypothesis import strategies as st

import oracles
from conftest import random_corpus
from dirlm.analysis import (coverage_ratio, corpus_stats, cross_dataset_similarity, jaccard,
                            pairwise_site_similarity, stem_reduction)
from dirlm.dataset import Corpus, TooFewDomains, generate_synthetic_corpus
from dirlm.porter import stem

from conftest import STEM_WORDS as WORDS


@pytest.mark.parametrize("a, b, expected", [
    ({"x"}, {"x"}, 1.0), ({"x"}, {"y"}, 0.0), ({"x", "y"}, {"y", "z"}, 1 / 3), (set(), set(), 1.0),
    (set(), {"x"}, 0.0),
])
def test_jaccard_examples(a, b, expected):
    assert jaccard(a, b) == pytest.approx(expected)


sets = st.sets(st.sampled_from("abcdefg"))


@given(sets, sets, sets)
def test_jaccard_properties(a, b, common):
    assert jaccard(a, b) == jaccard(b, a)
    assert 0.0 <= jaccard(a, b) <= 1.0
    if a:
        assert jaccard(a, a) == 1.0
    assert jaccard(a | common, b | common) >= jaccard(a, b) - 1e-12


def test_dir_count_example():
    corpus = Corpus({"d1": [("account", "info")], "d2": [("account", "settings")]})
    rep = corpus_stats(corpus)
    assert rep.n_dirs == 4 and rep.n_unique_dirs == 3


def test_single_empty_site():
    rep = corpus_stats(Corpus({"d": []}))
    assert rep.n_domains == 1
    assert all(getattr(rep, f) == 0 for f in ("n_paths", "paths_avg", "paths_std", "n_unique_paths", "n_dirs",
                                             "n_unique_dirs", "depth_avg", "depth_std", "sim_avg", "sim_std"))


@pytest.mark.parametrize("seed", range(10))
def test_stats_match_flat_recount(seed):
    corpus = random_corpus(seed)
    rep = corpus_stats(corpus)
    expected = oracles.stats(corpus.sites)
    for key, value in expected.items():
        assert getattr(rep, key) == pytest.approx(value, abs=1e-12), key
    assert rep.n_unique_paths <= rep.n_paths and rep.n_unique_dirs <= rep.n_dirs
    assert 0.0 <= rep.sim_avg <= 1.0


def test_stats_on_synthetic_corpus_match_recount(tmp_path):
    corpus = generate_synthetic_corpus(7, 12, 60)
    path = tmp_path / "c.ndjson"
    corpus.save(path)
    # recount from the serialized file, independent of the Corpus object
    import json
    sites = {}
    for line in path.read_text().splitlines():
        rec = json.loads(line)
        sites.setdefault(rec["domain"], []).append(tuple(s for s in rec["path"].split("/") if s))
    expected = oracles.stats(sites)
    rep = corpus_stats(corpus)
    for key, value in expected.items():
        assert getattr(rep, key) == pytest.approx(value, abs=1e-12), key


def test_stats_permutation_invariant():
    corpus = random_corpus(3)
    reversed_corpus = Corpus(dict(reversed(list(corpus.sites.items()))))
    assert corpus_stats(corpus) == corpus_stats(reversed_corpus)


def test_pairwise_similarity_examples():
    same = Corpus({"a": [("x",), ("y",)], "b": [("y",), ("x",)]})
    assert pairwise_site_similarity(same) == (1.0, 0.0)
    disjoint = Corpus({"a": [("x",)], "b": [("y",)]})
    assert pairwise_site_similarity(disjoint) == (0.0, 0.0)
    with pytest.raises(TooFewDomains):
        pairwise_site_similarity(Corpus({"a": [("x",)]}))


def test_pairwise_similarity_double_loop():
    corpus = generate_synthetic_corpus(5, 5, 40)
    doms = list(corpus.sites)
    sims = []
    for i in range(len(doms)):
        for j in range(i + 1, len(doms)):
            a = {s for p in corpus.sites[doms[i]] for s in p}
            b = {s for p in corpus.sites[doms[j]] for s in p}
            sims.append(len(a & b) / len(a | b))
    mean, std = oracles.mean_pstd(sims)
    got = pairwise_site_similarity(corpus)
    assert got[0] == pytest.approx(mean) and got[1] == pytest.approx(std)


@pytest.mark.parametrize("seed", range(10))
def test_coverage_matches_set_oracle(seed):
    corpus = random_corpus(seed)
    words = random.Random(seed).sample(WORDS, 5)
    assert coverage_ratio(corpus, words) == pytest.approx(oracles.coverage(corpus.sites, words, False))
    by_depth = coverage_ratio(corpus, words, by_depth=True)
    expected = oracles.coverage(corpus.sites, words, True)
    assert by_depth.keys() == expected.keys()
    for d in expected:
        assert by_depth[d] == pytest.approx(expected[d])


def test_coverage_extremes():
    corpus = random_corpus(1)
    assert set(coverage_ratio(corpus, WORDS, by_depth=True).values()) == {1.0}
    assert coverage_ratio(corpus, ["zzz"]) == 0.0


def test_coverage_top_segments_wordlist():
    corpus = generate_synthetic_corpus(7, 10, 80)
    counts = Counter(s for p in corpus.all_paths() for s in p)
    top = [w for w, _ in counts.most_common(40)]
    assert coverage_ratio(corpus, top) == pytest.approx(oracles.coverage(corpus.sites, top, False))


@given(st.integers(0, 50), st.sets(st.sampled_from(WORDS)), st.sets(st.sampled_from(WORDS)))
def test_coverage_monotone(seed, w1, extra):
    corpus = random_corpus(seed)
    small = coverage_ratio(corpus, w1, by_depth=True)
    big = coverage_ratio(corpus, w1 | extra, by_depth=True)
    assert all(small[d] <= big[d] for d in small)


@pytest.mark.parametrize("word, root", [("dogs", "dog"), ("running", "run")])
def test_stem_examples(word, root):
    assert stem(word) == root


def test_stem_reduction_article_forms():
    corpus = Corpus({"d": [("article",), ("articles",), ("Article",), ("Article", "x")]})
    rep = stem_reduction(corpus)
    assert rep.n_unique_dirs == 4  # article, articles, Article, x
    assert rep.n_unique_roots == 2  # articl, x
    assert rep.examples["articl"] == pytest.approx({"Article": 50.0, "article": 25.0, "articles": 25.0})


@pytest.mark.parametrize("seed", range(10))
def test_stem_reduction_matches_oracle(seed):
    corpus = random_corpus(seed)
    rep = stem_reduction(corpus)
    occurrences, roots = oracles.stem_groups(corpus.sites, stem)
    assert rep.n_unique_dirs == len(occurrences)
    assert rep.n_unique_roots == len(roots) <= len(occurrences)
    assert rep.reduction == len(occurrences) - len(roots)
    multi = {r: f for r, f in roots.items() if len(f) > 1}
    assert set(rep.examples) == set(multi)
    for r, forms in multi.items():
        total = sum(forms.values())
        for s, n in forms.items():
            assert rep.examples[r][s] == pytest.approx(100 * n / total)


def test_cross_dataset_similarity():
    a = Corpus({"x": [("news",), ("news", "2024")]})
    b = Corpus({"y": [("news",), ("about",)]})
    out = cross_dataset_similarity(a, b)
    assert out["jaccard"] == pytest.approx(1 / 3)
    assert out["common_paths"] == 1 and out["common_paths_rel"] == pytest.approx(1 / 3)


def test_stats_csv_mentions_population_std():
    assert "std_kind,population" in corpus_stats(random_corpus(0)).to_csv()
