"""Aggregate attack traces into the comparison metrics and report files.

CSV schemas written by :func:`report`:

``results.csv``
    ``strategy,wordlist,n_sites,mean_successes[,improvement_pct]``. The last
    column is present only for two or more rows and is relative to the
    breadth-first baseline (the first ``breadth`` row, else the first row).
``bins.csv``
    ``strategy,wordlist,bin,mean_hits,mean_hit_ratio`` where ``mean_hits``
    counts hits whose request index falls in the bin and ``mean_hit_ratio``
    divides those hits by the requests actually issued in the bin.
``sweep.csv`` (from :func:`write_sweep`)
    ``top_predicts,mean_successes,mean_requests,total_requests``.
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass
from typing import Dict, Iterable, List, Mapping, Optional, Sequence, Tuple
from xml.sax.saxutils import escape

from .strategies import AttackTrace, SimOracle, run_lm

DEFAULT_SWEEP = (100, 250, 500, 750, 1000, 2000, 5000, 10000)


class EmptyInput(ValueError):
    pass


@dataclass(frozen=True)
class BinSpec:
    edges: Tuple[Tuple[int, int], ...] = ((1, 100), (101, 1000), (1001, 10000), (10001, 50000), (50001, 100000))

    def __post_init__(self):
        if not self.edges:
            raise ValueError("at least one bin is required")
        prev_hi = 0
        for lo, hi in self.edges:
            if lo != prev_hi + 1 or hi < lo:
                raise ValueError(f"bins must be contiguous and ascending from 1, got {self.edges}")
            prev_hi = hi

    def labels(self) -> List[str]:
        return [f"{lo}-{hi}" for lo, hi in self.edges]

    def index_of(self, request_index: int) -> Optional[int]:
        for i, (lo, hi) in enumerate(self.edges):
            if lo <= request_index <= hi:
                return i
        return None

    def width(self, i: int) -> int:
        lo, hi = self.edges[i]
        return hi - lo + 1


DEFAULT_BINS = BinSpec()


def avg_success(traces: Sequence[AttackTrace]) -> float:
    if not traces:
        raise EmptyInput("no traces to average")
    return sum(t.successes for t in traces) / len(traces)


def bin_hits(trace: AttackTrace, bins: BinSpec = DEFAULT_BINS) -> List[int]:
    """Hits per bin for one trace.

    Hits past the last bin are not dropped silently; they raise, because
    the partition property would otherwise break.
    """
    counts = [0] * len(bins.edges)
    for idx in trace.hit_indices():
        b = bins.index_of(idx)
        if b is None:
            raise ValueError(f"request index {idx} lies outside every bin")
        counts[b] += 1
    return counts


def bin_requests(trace: AttackTrace, bins: BinSpec = DEFAULT_BINS) -> List[int]:
    n = trace.requests
    return [max(0, min(n, hi) - lo + 1) for lo, hi in bins.edges]


def bins_efficiency(traces: Sequence[AttackTrace], bins: BinSpec = DEFAULT_BINS) -> List[float]:
    """Mean hits per bin over traces (zeros for an empty list)."""
    if not traces:
        return [0.0] * len(bins.edges)
    per = [bin_hits(t, bins) for t in traces]
    return [sum(col) / len(traces) for col in zip(*per)]


def bins_hit_ratio(traces: Sequence[AttackTrace], bins: BinSpec = DEFAULT_BINS) -> List[float]:
    """Mean over traces of hits/requests issued within each bin (0 if none issued)."""
    if not traces:
        return [0.0] * len(bins.edges)
    sums = [0.0] * len(bins.edges)
    for t in traces:
        for i, (h, r) in enumerate(zip(bin_hits(t, bins), bin_requests(t, bins))):
            sums[i] += h / r if r else 0.0
    return [s / len(traces) for s in sums]


@dataclass
class EvalResult:
    strategy: str
    wordlist: str
    per_site: Dict[str, int]
    per_site_requests: Dict[str, int]
    per_site_bins: Dict[str, List[int]]
    bin_means: List[float]
    bin_ratios: List[float]
    bins: BinSpec = DEFAULT_BINS

    @property
    def mean(self) -> float:
        if not self.per_site:
            raise EmptyInput("result has no sites")
        return sum(self.per_site.values()) / len(self.per_site)

    @property
    def total_requests(self) -> int:
        return sum(self.per_site_requests.values())

    @property
    def mean_requests(self) -> float:
        return self.total_requests / len(self.per_site) if self.per_site else 0.0

    def to_dict(self) -> dict:
        return {
            "strategy": self.strategy,
            "wordlist": self.wordlist,
            "bins": [list(e) for e in self.bins.edges],
            "per_site": self.per_site,
            "per_site_requests": self.per_site_requests,
            "per_site_bins": self.per_site_bins,
            "bin_means": self.bin_means,
            "bin_ratios": self.bin_ratios,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "EvalResult":
        return cls(
            strategy=data["strategy"],
            wordlist=data["wordlist"],
            per_site=dict(data["per_site"]),
            per_site_requests=dict(data["per_site_requests"]),
            per_site_bins={d: list(v) for d, v in data["per_site_bins"].items()},
            bin_means=list(data["bin_means"]),
            bin_ratios=list(data["bin_ratios"]),
            bins=BinSpec(tuple(tuple(e) for e in data["bins"])),
        )


def evaluate(traces: Mapping[str, AttackTrace], strategy: str, wordlist: str = "",
             bins: BinSpec = DEFAULT_BINS) -> EvalResult:
    """Summarise one strategy's traces, keyed by target domain."""
    items = list(traces.items())
    per_bins = {d: bin_hits(t, bins) for d, t in items}
    for d, t in items:
        assert sum(per_bins[d]) == t.successes
    return EvalResult(
        strategy=strategy,
        wordlist=wordlist,
        per_site={d: t.successes for d, t in items},
        per_site_requests={d: t.requests for d, t in items},
        per_site_bins=per_bins,
        bin_means=bins_efficiency([t for _, t in items], bins),
        bin_ratios=bins_hit_ratio([t for _, t in items], bins),
        bins=bins,
    )


def toppredicts_sweep(targets: Mapping[str, Sequence], model, ks: Iterable[int] = DEFAULT_SWEEP,
                      budget: int = 100_000, bins: BinSpec = DEFAULT_BINS) -> Dict[int, EvalResult]:
    """Run the language-model attack once per ``k`` on every target site."""
    out = {}
    for k in ks:
        traces = {d: run_lm(SimOracle.from_paths(paths, budget), model, k) for d, paths in targets.items()}
        out[k] = evaluate(traces, "lm", f"top{k}", bins)
    return out


def _num(x: float) -> str:
    return f"{x:.4f}"


def improvements(results: Sequence[EvalResult]) -> List[float]:
    if not results:
        raise EmptyInput("no results")
    base = next((r for r in results if r.strategy == "breadth"), results[0]).mean
    if base == 0:
        return [float("nan")] * len(results)
    return [100.0 * (r.mean - base) / base for r in results]


def comparison_table(results: Sequence[EvalResult]) -> str:
    if not results:
        raise EmptyInput("no results to report")
    with_improvement = len(results) > 1
    header = ["strategy", "wordlist", "n_sites", "mean_successes"] + (["improvement_pct"] if with_improvement else [])
    lines = [",".join(header)]
    gains = improvements(results) if with_improvement else [None] * len(results)
    for r, g in zip(results, gains):
        row = [r.strategy, r.wordlist, str(len(r.per_site)), _num(r.mean)]
        if with_improvement:
            row.append("nan" if math.isnan(g) else f"{g:+.1f}")
        lines.append(",".join(row))
    return "\n".join(lines) + "\n"


def bins_table(results: Sequence[EvalResult]) -> str:
    if not results:
        raise EmptyInput("no results to report")
    lines = ["strategy,wordlist,bin,mean_hits,mean_hit_ratio"]
    for r in results:
        for label, h, q in zip(r.bins.labels(), r.bin_means, r.bin_ratios):
            lines.append(f"{r.strategy},{r.wordlist},{label},{_num(h)},{_num(q)}")
    return "\n".join(lines) + "\n"


def sweep_table(sweep: Mapping[int, EvalResult]) -> str:
    lines = ["top_predicts,mean_successes,mean_requests,total_requests"]
    for k, r in sweep.items():
        lines.append(f"{k},{_num(r.mean)},{_num(r.mean_requests)},{r.total_requests}")
    return "\n".join(lines) + "\n"


# --------------------------------------------------------------------------
# SVG charts, written by hand so no plotting backend is needed

_W, _H, _PAD = 640, 360, 60
_COLOURS = ("#4c72b0", "#dd8452", "#55a868", "#c44e52", "#8172b3", "#937860", "#da8bc3", "#8c8c8c")


def _svg(body: List[str], title: str) -> str:
    head = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{_W}" height="{_H}" viewBox="0 0 {_W} {_H}">',
        f'<rect width="{_W}" height="{_H}" fill="white"/>',
        f'<text x="{_W / 2:.1f}" y="24" text-anchor="middle" font-family="sans-serif" font-size="14">{escape(title)}</text>',
        f'<line x1="{_PAD}" y1="{_H - _PAD}" x2="{_W - _PAD / 2}" y2="{_H - _PAD}" stroke="black"/>',
        f'<line x1="{_PAD}" y1="{_H - _PAD}" x2="{_PAD}" y2="{_PAD / 2}" stroke="black"/>',
    ]
    return "\n".join(head + body + ["</svg>"]) + "\n"


def _y_axis(top: float) -> List[str]:
    out = []
    plot_h = _H - 1.5 * _PAD
    for i in range(5):
        v = top * i / 4
        y = _H - _PAD - plot_h * i / 4
        out.append(f'<text x="{_PAD - 6}" y="{y + 4:.1f}" text-anchor="end" font-family="sans-serif" '
                   f'font-size="10">{v:.1f}</text>')
    return out


def bar_chart_svg(labels: Sequence[str], values: Sequence[float], title: str) -> str:
    top = max(list(values) + [1e-9]) * 1.1
    plot_w, plot_h = _W - 1.5 * _PAD, _H - 1.5 * _PAD
    slot = plot_w / max(len(values), 1)
    body = _y_axis(top)
    for i, (label, v) in enumerate(zip(labels, values)):
        h = plot_h * v / top
        x = _PAD + i * slot + slot * 0.15
        y = _H - _PAD - h
        body.append(f'<rect x="{x:.1f}" y="{y:.1f}" width="{slot * 0.7:.1f}" height="{h:.1f}" '
                    f'fill="{_COLOURS[i % len(_COLOURS)]}"/>')
        body.append(f'<text x="{x + slot * 0.35:.1f}" y="{y - 4:.1f}" text-anchor="middle" '
                    f'font-family="sans-serif" font-size="10">{v:.1f}</text>')
        body.append(f'<text x="{x + slot * 0.35:.1f}" y="{_H - _PAD + 14}" text-anchor="middle" '
                    f'font-family="sans-serif" font-size="10">{escape(label)}</text>')
    return _svg(body, title)


def line_chart_svg(x_labels: Sequence[str], series: Mapping[str, Sequence[float]], title: str) -> str:
    top = max([v for vs in series.values() for v in vs] + [1e-9]) * 1.1
    plot_w, plot_h = _W - 1.5 * _PAD, _H - 1.5 * _PAD
    step = plot_w / max(len(x_labels) - 1, 1)
    body = _y_axis(top)
    for i, label in enumerate(x_labels):
        body.append(f'<text x="{_PAD + i * step:.1f}" y="{_H - _PAD + 14}" text-anchor="middle" '
                    f'font-family="sans-serif" font-size="10">{escape(label)}</text>')
    for j, (name, vs) in enumerate(series.items()):
        colour = _COLOURS[j % len(_COLOURS)]
        pts = " ".join(f"{_PAD + i * step:.1f},{_H - _PAD - plot_h * v / top:.1f}" for i, v in enumerate(vs))
        body.append(f'<polyline points="{pts}" fill="none" stroke="{colour}" stroke-width="2"/>')
        body.append(f'<text x="{_W - _PAD / 2}" y="{_PAD / 2 + 14 * (j + 1)}" text-anchor="end" '
                    f'font-family="sans-serif" font-size="10" fill="{colour}">{escape(name)}</text>')
    return _svg(body, title)


def _label(r: EvalResult) -> str:
    return f"{r.strategy}/{r.wordlist}" if r.wordlist else r.strategy


def report(results: Sequence[EvalResult], out_dir) -> Dict[str, str]:
    """Write the comparison table, per-bin table and two SVG charts.

    Returns a mapping from artefact name to the file written.
    """
    if not results:
        raise EmptyInput("no results to report")
    os.makedirs(out_dir, exist_ok=True)
    labels = [_label(r) for r in results]
    files = {
        "results.csv": comparison_table(results),
        "bins.csv": bins_table(results),
        "results.svg": bar_chart_svg(labels, [r.mean for r in results], "Mean successful responses"),
        "bins.svg": line_chart_svg(results[0].bins.labels(), {l: r.bin_means for l, r in zip(labels, results)},
                                   "Mean hits per request bin"),
    }
    written = {}
    for name, text in files.items():
        path = os.path.join(out_dir, name)
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
        written[name] = path
    return written


def write_sweep(sweep: Mapping[int, EvalResult], out_dir) -> Dict[str, str]:
    os.makedirs(out_dir, exist_ok=True)
    files = {
        "sweep.csv": sweep_table(sweep),
        "sweep.svg": line_chart_svg([str(k) for k in sweep], {"mean successes": [r.mean for r in sweep.values()]},
                                    "Mean successes by topPredicts"),
    }
    written = {}
    for name, text in files.items():
        path = os.path.join(out_dir, name)
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
        written[name] = path
    return written
