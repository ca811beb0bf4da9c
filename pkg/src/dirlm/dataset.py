"""Corpus ingestion, domain-level splitting, wordlists and data sources."""

from __future__ import annotations

import json
import logging
import math
import os
import random
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, Iterable, Iterator, List, Optional, Sequence, Tuple, Union
from urllib.parse import urlsplit

import httpx

from .url_model import CrawlRecord, MalformedRecord, PathSeq, RejectedPath, normalize_path, parse_crawl_line, render

log = logging.getLogger(__name__)

DEFAULT_INDEX_URL = "https://index.commoncrawl.org"
DEFAULT_CRAWL_ID = "CC-MAIN-2023-40"
INDEX_URL_ENV = "DIRLM_INDEX_URL"


class TooFewDomains(ValueError):
    pass


class NetworkError(RuntimeError):
    pass


class UnknownCrawl(LookupError):
    pass


@dataclass
class IngestReport:
    malformed: int = 0
    non_200: int = 0
    rejected: int = 0
    empty: int = 0
    duplicates: int = 0
    filtered_domain: int = 0
    kept: int = 0


@dataclass
class Corpus:
    """Unique normalized paths per domain, in first-seen order."""

    sites: Dict[str, List[PathSeq]] = field(default_factory=dict)
    report: Optional[IngestReport] = None

    @property
    def domains(self) -> List[str]:
        return list(self.sites)

    def __len__(self):
        return len(self.sites)

    def all_paths(self) -> Iterator[PathSeq]:
        for paths in self.sites.values():
            yield from paths

    def subset(self, domains: Iterable[str]) -> "Corpus":
        return Corpus({d: list(self.sites[d]) for d in domains})

    def merged(self) -> List[PathSeq]:
        return list(self.all_paths())

    def dump(self, fp) -> None:
        """NDJSON ``{domain, path}``, one line per path."""
        for domain, paths in self.sites.items():
            for p in paths:
                fp.write(json.dumps({"domain": domain, "path": render(p)}) + "\n")

    def save(self, path) -> None:
        with open(path, "w", encoding="utf-8", newline="\n") as fp:
            self.dump(fp)


def load_corpus(path) -> Corpus:
    """Read a corpus written by :meth:`Corpus.save` (status 200 is implied)."""
    def records():
        with open(path, encoding="utf-8") as fp:
            for line in fp:
                if line.strip():
                    obj = json.loads(line)
                    yield CrawlRecord(obj["domain"], obj["path"], int(obj.get("status", 200)))
    return ingest(records())


def ingest(records: Iterable[Union[CrawlRecord, str]], allowlist: Optional[Iterable[str]] = None) -> Corpus:
    """Build a corpus from crawl records.

    Only status-200 responses are kept. Paths are normalized; rejected and
    root-only paths are dropped and duplicates within a domain removed.
    Items may be raw NDJSON lines, in which case malformed ones are counted
    in ``corpus.report`` and skipped.
    """
    allowed = set(allowlist) if allowlist is not None else None
    report = IngestReport()
    sites: Dict[str, List[PathSeq]] = {}
    seen: Dict[str, set] = {}
    for rec in records:
        if isinstance(rec, str):
            if not rec.strip():
                continue
            try:
                rec = parse_crawl_line(rec)
            except MalformedRecord:
                report.malformed += 1
                continue
        if allowed is not None and rec.domain not in allowed:
            report.filtered_domain += 1
            continue
        if rec.status != 200:
            report.non_200 += 1
            continue
        try:
            path = normalize_path(rec.raw_path)
        except RejectedPath:
            report.rejected += 1
            continue
        if not path:
            report.empty += 1
            continue
        bucket = seen.setdefault(rec.domain, set())
        if path in bucket:
            report.duplicates += 1
            continue
        bucket.add(path)
        sites.setdefault(rec.domain, []).append(path)
        report.kept += 1
    return Corpus(sites, report)


def ingest_file(path, allowlist=None) -> Corpus:
    with open(path, encoding="utf-8") as fp:
        return ingest(fp, allowlist)


@dataclass(frozen=True)
class SplitSpec:
    train_frac: float = 0.7
    val_frac: float = 0.1
    test_frac: float = 0.2
    seed: int = 0

    def __post_init__(self):
        fracs = (self.train_frac, self.val_frac, self.test_frac)
        if not all(0 < f < 1 for f in fracs):
            raise ValueError("split fractions must lie in (0, 1)")
        if not math.isclose(sum(fracs), 1.0, abs_tol=1e-9):
            raise ValueError("split fractions must sum to 1")


def split_by_domain(corpus: Corpus, spec: SplitSpec = SplitSpec()) -> Tuple[Corpus, Corpus, Corpus]:
    """Assign whole domains to train/validation/test partitions.

    Validation and test sizes are rounded (at least one domain each); the
    remainder goes to training.
    """
    n = len(corpus)
    if n < 3:
        raise TooFewDomains(f"need at least 3 domains, got {n}")
    domains = sorted(corpus.sites)
    random.Random(spec.seed).shuffle(domains)
    n_val = max(1, math.floor(n * spec.val_frac + 0.5))
    n_test = max(1, math.floor(n * spec.test_frac + 0.5))
    n_train = n - n_val - n_test
    if n_train < 1:
        raise TooFewDomains(f"{n} domains leave no training partition")
    train = domains[:n_train]
    val = domains[n_train:n_train + n_val]
    test = domains[n_train + n_val:]
    return corpus.subset(train), corpus.subset(val), corpus.subset(test)


# --------------------------------------------------------------------------
# wordlists

@dataclass
class Wordlist:
    name: str
    words: List[str]

    def __post_init__(self):
        self.words = list(dict.fromkeys(w for w in self.words if w))

    def __len__(self):
        return len(self.words)

    def __iter__(self):
        return iter(self.words)

    def __contains__(self, word):
        return word in set(self.words)


# name -> (file name, word count of the published list)
KNOWN_WORDLISTS = {
    "big_wfuzz": ("big.txt", 3024),
    "top_10k_github": ("top-10k-web-directories_from_10M_urlteam_links.txt", 10000),
    "megabeast_wfuzz": ("megabeast.txt", 45459),
    "directory-list_dirbuster": ("directory-list-1.0.txt", 141835),
}
WORDLIST_DIR_ENV = "DIRLM_WORDLIST_DIR"


def load_wordlist(path, name: Optional[str] = None) -> Wordlist:
    """One word per line; blank lines and ``#`` comments are skipped."""
    words = []
    with open(path, encoding="utf-8", errors="replace") as fp:
        for line in fp:
            w = line.strip()
            if w and not w.startswith("#"):
                words.append(w)
    return Wordlist(name or Path(path).stem, words)


def load_named_wordlist(name: str, directory=None) -> Wordlist:
    """Load one of the four general-purpose lists from a local directory.

    The lists are not redistributed; point ``directory`` (or the
    ``DIRLM_WORDLIST_DIR`` variable) at a folder holding the original files.
    """
    if name not in KNOWN_WORDLISTS:
        raise KeyError(f"unknown wordlist {name!r}; choose from {sorted(KNOWN_WORDLISTS)}")
    directory = directory or os.environ.get(WORDLIST_DIR_ENV)
    if not directory:
        raise FileNotFoundError(f"set {WORDLIST_DIR_ENV} to the directory holding {KNOWN_WORDLISTS[name][0]}")
    fname, expected = KNOWN_WORDLISTS[name]
    wl = load_wordlist(Path(directory) / fname, name)
    if len(wl) != expected:
        log.warning("%s has %d words, expected %d", name, len(wl), expected)
    return wl


def random_wordlist(pool: Sequence[str], n: int, seed: int = 0, name: str = "random") -> Wordlist:
    """``n`` distinct words drawn from ``pool`` in a seeded random order."""
    pool = sorted(set(pool))
    rng = random.Random(seed)
    return Wordlist(name, rng.sample(pool, min(n, len(pool))))


# --------------------------------------------------------------------------
# crawl index client

def _index_get(client: httpx.Client, url: str, params: dict, attempts: int, backoff: float) -> httpx.Response:
    delay = backoff
    for attempt in range(1, attempts + 1):
        try:
            resp = client.get(url, params=params)
        except httpx.TransportError as exc:
            err = f"{type(exc).__name__}: {exc}"
        else:
            if resp.status_code < 500 and resp.status_code != 429:
                return resp
            err = f"HTTP {resp.status_code}"
        if attempt < attempts:
            log.info("index request failed (%s), retry %d in %.1fs", err, attempt, delay)
            time.sleep(delay)
            delay *= 2
    raise NetworkError(f"crawl index unreachable after {attempts} attempts: {err}")


def _no_captures(resp: httpx.Response) -> bool:
    try:
        return "no captures" in str(resp.json().get("message", "")).lower()
    except (ValueError, AttributeError):
        return "no captures" in resp.text.lower()


def fetch_crawl_index(
    domain: str,
    crawl_id: str = DEFAULT_CRAWL_ID,
    index_url: Optional[str] = None,
    client: Optional[httpx.Client] = None,
    concurrency: int = 1,
    attempts: int = 5,
    backoff: float = 1.0,
) -> Iterator[CrawlRecord]:
    """Query a CDX-style crawl index for ``domain/*`` and yield records.

    Pages are fetched up to ``concurrency`` at a time and yielded in page
    order. Rows whose host differs from ``domain`` or that carry no numeric
    status are dropped.
    """
    index_url = (index_url or os.environ.get(INDEX_URL_ENV) or DEFAULT_INDEX_URL).rstrip("/")
    endpoint = f"{index_url}/{crawl_id}-index"
    base = {"url": f"{domain}/*", "output": "json"}
    own_client = client is None
    client = client or httpx.Client(timeout=60.0, follow_redirects=True)
    try:
        resp = _index_get(client, endpoint, {**base, "showNumPages": "true"}, attempts, backoff)
        if resp.status_code == 404:
            if _no_captures(resp):
                return
            raise UnknownCrawl(crawl_id)
        resp.raise_for_status()
        n_pages = int(resp.json().get("pages", 0))

        def page(i: int) -> httpx.Response:
            return _index_get(client, endpoint, {**base, "page": str(i)}, attempts, backoff)

        with ThreadPoolExecutor(max_workers=max(1, concurrency)) as pool:
            for r in pool.map(page, range(n_pages)):
                if r.status_code == 404:
                    if _no_captures(r):
                        continue
                    raise UnknownCrawl(crawl_id)
                r.raise_for_status()
                yield from _rows_to_records(r.text, domain)
    finally:
        if own_client:
            client.close()


def _rows_to_records(body: str, domain: str) -> Iterator[CrawlRecord]:
    want = domain.lower()
    for line in body.splitlines():
        if not line.strip():
            continue
        try:
            row = json.loads(line)
            status = int(row["status"])
            parts = urlsplit(row["url"])
        except (ValueError, KeyError, TypeError):
            continue
        if (parts.hostname or "").lower() != want or not 100 <= status <= 599:
            continue
        raw = parts.path or "/"
        if parts.query:
            raw += "?" + parts.query
        yield CrawlRecord(domain, raw, status)


# --------------------------------------------------------------------------
# synthetic corpora

def generate_synthetic_corpus(grammar_seed: int, n_sites: int, paths_per_site: int) -> Corpus:
    """Sample ``n_sites`` sites from the fixed directory grammar.

    See :mod:`dirlm.synth` for the grammar itself.
    """
    from .synth import sample_corpus
    if n_sites < 1:
        raise ValueError("n_sites must be >= 1")
    return sample_corpus(grammar_seed, n_sites, paths_per_site)
