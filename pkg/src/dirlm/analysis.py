"""Dataset analyses: summary statistics, site similarity, wordlist coverage
and stemming reduction.

Standard deviations are population standard deviations throughout.
"""

from __future__ import annotations

import csv
import io
import itertools
import statistics
from collections import Counter, defaultdict
from dataclasses import dataclass, field, fields
from typing import Dict, Iterable, Tuple, Union

from . import porter
from .dataset import Corpus, TooFewDomains


@dataclass
class StatsReport:
    n_domains: int = 0
    n_paths: int = 0
    paths_avg: float = 0.0
    paths_std: float = 0.0
    n_unique_paths: int = 0
    n_dirs: int = 0
    n_unique_dirs: int = 0
    depth_avg: float = 0.0
    depth_std: float = 0.0
    sim_avg: float = 0.0
    sim_std: float = 0.0
    std_kind: str = field(default="population", repr=False)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["feature", "value"])
        for f in fields(self):
            w.writerow([f.name, _fmt(getattr(self, f.name))])
        return buf.getvalue()


def _fmt(v):
    return f"{v:.6f}" if isinstance(v, float) else v


def _pstd(xs) -> float:
    return statistics.pstdev(xs) if len(xs) > 1 else 0.0


def jaccard(a: Iterable, b: Iterable) -> float:
    a, b = set(a), set(b)
    if not a and not b:
        return 1.0
    return len(a & b) / len(a | b)


def site_directories(paths) -> set:
    return {seg for p in paths for seg in p}


def pairwise_site_similarity(corpus: Corpus) -> Tuple[float, float]:
    """Mean and std of Jaccard similarity over all unordered domain pairs."""
    if len(corpus) < 2:
        raise TooFewDomains("need at least 2 domains for pairwise similarity")
    dirsets = [site_directories(corpus.sites[d]) for d in sorted(corpus.sites)]
    sims = [jaccard(a, b) for a, b in itertools.combinations(dirsets, 2)]
    return statistics.fmean(sims), _pstd(sims)


def corpus_stats(corpus: Corpus) -> StatsReport:
    domains = sorted(corpus.sites)
    per_site = [len(corpus.sites[d]) for d in domains]
    paths = [p for d in domains for p in corpus.sites[d]]
    depths = [len(p) for p in paths]
    rep = StatsReport(n_domains=len(domains), n_paths=len(paths))
    if per_site:
        rep.paths_avg = statistics.fmean(per_site)
        rep.paths_std = _pstd(per_site)
    rep.n_unique_paths = len(set(paths))
    rep.n_dirs = sum(depths)
    rep.n_unique_dirs = len(site_directories(paths))
    if depths:
        rep.depth_avg = statistics.fmean(depths)
        rep.depth_std = _pstd(depths)
    if len(domains) >= 2:
        rep.sim_avg, rep.sim_std = pairwise_site_similarity(corpus)
    return rep


def segments_by_depth(corpus: Corpus) -> Dict[int, set]:
    by_depth: Dict[int, set] = defaultdict(set)
    for p in corpus.all_paths():
        for i, seg in enumerate(p, start=1):
            by_depth[i].add(seg)
    return dict(sorted(by_depth.items()))


def coverage_ratio(corpus: Corpus, wordlist: Iterable[str], by_depth: bool = False) -> Union[float, Dict[int, float]]:
    """Share of distinct directory names found in ``wordlist``.

    With ``by_depth`` the ratio is computed separately for the names seen at
    each depth (1-based); otherwise all depths are pooled.
    """
    words = set(wordlist)
    levels = segments_by_depth(corpus)
    if by_depth:
        return {d: len(segs & words) / len(segs) for d, segs in levels.items()}
    pooled = set().union(*levels.values()) if levels else set()
    return len(pooled & words) / len(pooled) if pooled else 0.0


@dataclass
class StemReport:
    n_unique_dirs: int
    n_unique_roots: int
    reduction: int
    reduction_pct: float
    # root -> {surface form: percentage of occurrences}
    examples: Dict[str, Dict[str, float]]


def stem_reduction(corpus: Corpus) -> StemReport:
    """Group directory names by Porter root.

    Names are case-folded before stemming, so ``Article`` and ``articles``
    share the root ``articl``; surface forms are reported verbatim with the
    share of corpus occurrences each accounts for.
    """
    occurrences = Counter(seg for p in corpus.all_paths() for seg in p)
    forms: Dict[str, Counter] = defaultdict(Counter)
    for seg, n in occurrences.items():
        forms[porter.stem(seg.lower())][seg] += n
    examples = {}
    for root in sorted(forms):
        if len(forms[root]) > 1:
            total = sum(forms[root].values())
            examples[root] = {s: 100.0 * n / total for s, n in sorted(forms[root].items())}
    n_dirs, n_roots = len(occurrences), len(forms)
    return StemReport(
        n_unique_dirs=n_dirs,
        n_unique_roots=n_roots,
        reduction=n_dirs - n_roots,
        reduction_pct=100.0 * (n_dirs - n_roots) / n_dirs if n_dirs else 0.0,
        examples=examples,
    )


def cross_dataset_similarity(a: Corpus, b: Corpus) -> Dict[str, float]:
    """Jaccard of the two corpora's directory vocabularies and their common paths."""
    paths_a, paths_b = set(a.all_paths()), set(b.all_paths())
    common = paths_a & paths_b
    return {
        "jaccard": jaccard(site_directories(paths_a), site_directories(paths_b)),
        "common_paths": len(common),
        "common_paths_rel": len(common) / len(paths_a | paths_b) if paths_a or paths_b else 0.0,
    }
