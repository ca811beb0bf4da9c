import math
import random
import xml.dom.minidom

import pytest
from hypothesis import given
from hypothesis import strategies as st

from dirlm.eval import (DEFAULT_BINS, BinSpec, EmptyInput, EvalResult, avg_success, bin_hits, bin_requests,
                        bins_efficiency, bins_hit_ratio, bins_table, comparison_table, evaluate, improvements, report,
                        sweep_table, toppredicts_sweep, write_sweep)
from dirlm.strategies import AttackTrace, RequestEvent, SimOracle, run_lm


def trace_with_hits(n_requests, hits):
    hits = set(hits)
    return AttackTrace([RequestEvent((f"p{i}",), i in hits, i) for i in range(1, n_requests + 1)])


def result(strategy, successes, wordlist=""):
    traces = {f"s{i}": trace_with_hits(max(s, 1), range(1, s + 1)) for i, s in enumerate(successes)}
    return evaluate(traces, strategy, wordlist)


def test_avg_success():
    assert avg_success([trace_with_hits(5, [1, 2]), trace_with_hits(5, [1, 2, 3, 4])]) == 3.0


def test_avg_success_empty():
    with pytest.raises(EmptyInput):
        avg_success([])


def test_bins_example():
    t = trace_with_hits(10_000, [50, 500, 5000])
    assert bin_hits(t) == [1, 1, 1, 0, 0]
    assert bins_efficiency([t]) == [1.0, 1.0, 1.0, 0.0, 0.0]


def test_bins_no_hits():
    t = trace_with_hits(300, [])
    assert bin_hits(t) == [0] * 5
    assert bins_hit_ratio([t]) == [0.0] * 5


def test_bins_empty_input():
    assert bins_efficiency([]) == [0.0] * 5


def test_bin_requests_partial():
    assert bin_requests(trace_with_hits(150, [])) == [100, 50, 0, 0, 0]


def test_hit_ratio_uses_issued_requests():
    t = trace_with_hits(150, [1, 120])
    assert bins_hit_ratio([t])[:2] == [pytest.approx(0.01), pytest.approx(1 / 50)]


def test_hit_outside_bins_raises():
    with pytest.raises(ValueError):
        bin_hits(trace_with_hits(5, [5]), BinSpec(((1, 4),)))


@pytest.mark.parametrize("edges", [(), ((2, 10),), ((1, 10), (12, 20)), ((1, 10), (11, 5))])
def test_bad_bins(edges):
    with pytest.raises(ValueError):
        BinSpec(edges)


def test_default_bins_labels():
    assert DEFAULT_BINS.labels() == ["1-100", "101-1000", "1001-10000", "10001-50000", "50001-100000"]


@given(st.integers(0, 3000), st.integers(0, 10_000))
def test_bins_partition_successes(n, seed):
    rng = random.Random(seed)
    hits = [i for i in range(1, n + 1) if rng.random() < 0.1]
    t = trace_with_hits(n, hits)
    assert sum(bin_hits(t)) == t.successes
    assert sum(bin_requests(t)) == t.requests


def test_improvement_over_breadth():
    rows = [result("breadth", [10]), result("prob", [30])]
    assert improvements(rows) == [0.0, 200.0]
    table = comparison_table(rows)
    assert table.splitlines() == ["strategy,wordlist,n_sites,mean_successes,improvement_pct",
                                  "breadth,,1,10.0000,+0.0", "prob,,1,30.0000,+200.0"]


def test_improvement_baseline_not_first():
    assert improvements([result("prob", [30]), result("breadth", [10])]) == [200.0, 0.0]


def test_improvement_zero_baseline():
    rows = [result("breadth", [0]), result("prob", [3])]
    assert all(math.isnan(g) for g in improvements(rows))
    assert [line.split(",")[-1] for line in comparison_table(rows).splitlines()[1:]] == ["nan", "nan"]


def test_single_result_has_no_improvement_column():
    assert comparison_table([result("breadth", [4, 6])]).splitlines() == [
        "strategy,wordlist,n_sites,mean_successes", "breadth,,2,5.0000"]


@pytest.mark.parametrize("fn", [comparison_table, bins_table, improvements])
def test_empty_report_inputs(fn):
    with pytest.raises(EmptyInput):
        fn([])


def test_empty_report(tmp_path):
    with pytest.raises(EmptyInput):
        report([], tmp_path)


def test_report_files(tmp_path):
    written = report([result("breadth", [1, 2], "w"), result("prob", [3, 4], "w")], tmp_path / "out")
    assert sorted(written) == ["bins.csv", "bins.svg", "results.csv", "results.svg"]
    for name in ("bins.svg", "results.svg"):
        xml.dom.minidom.parse(written[name])
    rows = (tmp_path / "out" / "bins.csv").read_text().splitlines()
    assert rows[0] == "strategy,wordlist,bin,mean_hits,mean_hit_ratio" and len(rows) == 11


def test_round_trip():
    r = result("prob", [3, 0, 7], "w")
    assert EvalResult.from_dict(r.to_dict()) == r


def test_sweep_k1_matches_single_run(overfit_ab):
    model, _ = overfit_ab
    targets = {"a.org": [("a", "b")], "b.org": [("b",)]}
    sweep = toppredicts_sweep(targets, model, ks=[1], budget=20)
    single = {d: run_lm(SimOracle.from_paths(p, 20), model, 1) for d, p in targets.items()}
    assert sweep[1].per_site == {d: t.successes for d, t in single.items()}
    assert sweep[1].wordlist == "top1"


def test_sweep_budget_zero(overfit_ab, tmp_path):
    sweep = toppredicts_sweep({"a.org": [("a",)]}, overfit_ab[0], ks=[1, 5], budget=0)
    assert all(r.mean == 0 and r.total_requests == 0 for r in sweep.values())
    assert sweep_table(sweep).splitlines()[1] == "1,0.0000,0.0000,0"
    assert sorted(write_sweep(sweep, tmp_path)) == ["sweep.csv", "sweep.svg"]
