"""Directory brute-forcing strategies run against an offline site oracle.

Each strategy issues requests through a :class:`SimOracle` that answers
from a reconstructed site tree and enforces the request budget. The result
is an :class:`AttackTrace`, the ordered log of requests and hits.
"""

from __future__ import annotations

import heapq
import io
import itertools
from collections import deque
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Dict, Iterable, List, Optional, Sequence

from .fstree import WeightedTree, children_with_weights
from .url_model import ROOT, PathSeq, render

DEFAULT_BUDGET = 100_000
DEFAULT_MAX_DEPTH = 16
BUDGET, EXHAUSTED = "budget", "exhausted"


class BudgetExhausted(Exception):
    pass


class SimOracle:
    """Answers whether a path exists on the target, counting every request."""

    def __init__(self, site: WeightedTree, budget: int = DEFAULT_BUDGET):
        if budget < 0:
            raise ValueError("budget must be >= 0")
        self.site = site
        self.budget = budget
        self.requests_sent = 0

    @classmethod
    def from_paths(cls, paths: Iterable[PathSeq], budget: int = DEFAULT_BUDGET) -> "SimOracle":
        return cls(WeightedTree.from_paths(paths), budget)

    def query(self, path: PathSeq) -> bool:
        if self.requests_sent >= self.budget:
            raise BudgetExhausted
        self.requests_sent += 1
        return self.site.find(path) is not None


@dataclass(frozen=True)
class RequestEvent:
    path: PathSeq
    hit: bool
    index: int


@dataclass(frozen=True)
class Candidate:
    parent: PathSeq
    word: str
    priority: float

    @property
    def path(self) -> PathSeq:
        return self.parent + (self.word,)


@dataclass
class AttackTrace:
    events: List[RequestEvent] = field(default_factory=list)
    terminated_by: str = EXHAUSTED
    strategy: str = ""

    @property
    def successes(self) -> int:
        return sum(1 for e in self.events if e.hit)

    @property
    def requests(self) -> int:
        return len(self.events)

    def hit_indices(self) -> List[int]:
        return [e.index for e in self.events if e.hit]

    def to_csv(self) -> str:
        buf = io.StringIO()
        buf.write("index,path,hit\n")
        for e in self.events:
            path = render(e.path)
            if any(ch in path for ch in ',"\n'):
                path = '"' + path.replace('"', '""') + '"'
            buf.write(f"{e.index},{path},{int(e.hit)}\n")
        return buf.getvalue()


class Observer:
    """Hook for inspecting heap-based strategies; the default does nothing."""

    def pushed(self, candidate: Candidate) -> None:
        pass

    def popped(self, candidate: Candidate, heap: list) -> None:
        pass


class _Session:
    def __init__(self, oracle: SimOracle, strategy: str):
        self.oracle = oracle
        self.trace = AttackTrace(strategy=strategy)
        self.requested = set()

    def request(self, path: PathSeq) -> bool:
        if path in self.requested:
            raise AssertionError(f"duplicate request for {render(path)}")
        hit = self.oracle.query(path)
        self.requested.add(path)
        self.trace.events.append(RequestEvent(path, hit, len(self.trace.events) + 1))
        return hit

    def finish(self) -> AttackTrace:
        self.trace.terminated_by = BUDGET if self.oracle.requests_sent >= self.oracle.budget else EXHAUSTED
        return self.trace


def _breadth(session: _Session, queue: deque, words: Sequence[str]) -> None:
    while queue:
        current = queue.popleft()
        for word in words:
            url = current + (word,)
            if url in session.requested:
                continue  # already answered, costs nothing
            if session.request(url):
                queue.append(url)


def run_breadth(oracle: SimOracle, wordlist: Iterable[str]) -> AttackTrace:
    """Level-by-level brute force: every word under every found directory."""
    session = _Session(oracle, "breadth")
    try:
        _breadth(session, deque([ROOT]), list(wordlist))
    except BudgetExhausted:
        pass
    return session.finish()


def run_depth(oracle: SimOracle, wordlist: Iterable[str], max_depth: int = DEFAULT_MAX_DEPTH) -> AttackTrace:
    """Recursive brute force: a found directory is explored before its siblings.

    Paths deeper than ``max_depth`` are never requested.
    """
    words = list(wordlist)
    session = _Session(oracle, "depth")
    stack = [(ROOT, iter(words))]
    try:
        while stack:
            current, remaining = stack[-1]
            word = next(remaining, None)
            if word is None:
                stack.pop()
                continue
            url = current + (word,)
            if session.request(url) and len(url) < max_depth:
                stack.append((url, iter(words)))
    except BudgetExhausted:
        pass
    return session.finish()


class _Frontier:
    """Max-heap of candidates.

    Highest priority first; ties go to the shallower path, then the smaller
    word, then the earlier push.
    """

    def __init__(self, observer: Optional[Observer]):
        self.heap: list = []
        self.counter = itertools.count()
        self.observer = observer

    def push(self, parent: PathSeq, word: str, priority: float) -> None:
        heapq.heappush(self.heap, (-priority, len(parent) + 1, word, next(self.counter), parent))
        if self.observer:
            self.observer.pushed(Candidate(parent, word, priority))

    def pop(self) -> Candidate:
        negp, _, word, _, parent = heapq.heappop(self.heap)
        cand = Candidate(parent, word, -negp)
        if self.observer:
            self.observer.popped(cand, self.heap)
        return cand

    def __bool__(self):
        return bool(self.heap)


def order_by_tree_weight(words: Iterable[str], tree: WeightedTree) -> List[str]:
    """Words sorted by total weight in ``tree``, heaviest first; stable otherwise."""
    weights = tree.segment_weights()
    return sorted(words, key=lambda w: -weights.get(w, 0))


def run_probabilistic(oracle: SimOracle, tree: WeightedTree, fallback: Optional[Iterable[str]] = None,
                      observer: Optional[Observer] = None, reorder_fallback: bool = True) -> AttackTrace:
    """Best-first search over a weighted tree, then breadth-first fallback.

    A candidate's priority is its weight over the summed weights of its
    siblings. When the frontier runs dry with budget left, a breadth-first
    pass with ``fallback`` words runs over the root and every directory
    found so far, skipping anything already requested.
    """
    session = _Session(oracle, "prob")
    frontier = _Frontier(observer)
    found: List[PathSeq] = []

    def expand(url: PathSeq) -> None:
        kids = children_with_weights(tree, url)
        total = sum(w for _, w in kids)
        for word, weight in kids:
            frontier.push(url, word, weight / total)

    try:
        expand(ROOT)
        while frontier:
            url = frontier.pop().path
            if session.request(url):
                found.append(url)
                expand(url)
        if fallback is not None:
            words = order_by_tree_weight(fallback, tree) if reorder_fallback else list(fallback)
            _breadth(session, deque([ROOT] + found), words)
    except BudgetExhausted:
        pass
    return session.finish()


def run_lm(oracle: SimOracle, model, top_predicts: int, observer: Optional[Observer] = None,
           predictor: Optional[Callable] = None) -> AttackTrace:
    """Best-first search where candidates come from language-model predictions.

    Each found directory contributes its ``top_predicts`` most likely
    children, prioritised by their conditional probability. The attack ends
    when the budget is spent or no predictions remain.
    """
    if top_predicts < 1:
        raise ValueError("top_predicts must be >= 1")
    if predictor is None:
        from .lm import predict_topk as predictor
    session = _Session(oracle, "lm")
    frontier = _Frontier(observer)

    def expand(url: PathSeq) -> None:
        for word, prob in predictor(model, url, top_predicts):
            frontier.push(url, word, prob)

    try:
        expand(ROOT)
        while frontier:
            url = frontier.pop().path
            if url in session.requested:
                continue
            if session.request(url):
                expand(url)
    except BudgetExhausted:
        pass
    return session.finish()


# --------------------------------------------------------------------------
# many targets

STRATEGIES = ("breadth", "depth", "prob", "lm")


def run_strategy(strategy: str, oracle: SimOracle, *, wordlist=None, tree=None, fallback=None, model=None,
                 top_predicts: int = 500) -> AttackTrace:
    if strategy == "breadth":
        return run_breadth(oracle, wordlist or [])
    if strategy == "depth":
        return run_depth(oracle, wordlist or [])
    if strategy == "prob":
        if tree is None:
            raise ValueError("the probabilistic strategy needs a weighted tree")
        return run_probabilistic(oracle, tree, fallback)
    if strategy == "lm":
        if model is None:
            raise ValueError("the language-model strategy needs a model")
        return run_lm(oracle, model, top_predicts)
    raise ValueError(f"unknown strategy {strategy!r}")


def _simulate_one(args):
    strategy, paths, budget, kwargs = args
    return run_strategy(strategy, SimOracle.from_paths(paths, budget), **kwargs)


def simulate(targets: Dict[str, List[PathSeq]], strategy: str, budget: int = DEFAULT_BUDGET, jobs: int = 1,
             **kwargs) -> Dict[str, AttackTrace]:
    """Attack every target site with a fresh oracle; results keep target order."""
    domains = list(targets)
    work = [(strategy, targets[d], budget, kwargs) for d in domains]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            traces = list(pool.map(_simulate_one, work))
    else:
        traces = [_simulate_one(w) for w in work]
    return dict(zip(domains, traces))
