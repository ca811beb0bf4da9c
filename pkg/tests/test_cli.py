import json
import os

import pytest

from dirlm.cli import main
from pipeline import artefacts, replay_from_manifests, run_pipeline


@pytest.fixture(scope="module")
def runs(tmp_path_factory):
    first = tmp_path_factory.mktemp("run1")
    second = tmp_path_factory.mktemp("run2")
    run_pipeline(first)
    replay_from_manifests(first, second)
    return first, second


def test_unknown_subcommand():
    assert main(["frobnicate"]) == 2


def test_no_subcommand():
    assert main([]) == 2


def test_synth_is_deterministic(tmp_path):
    for name in ("a", "b"):
        assert main(["synth", "--seed", "4", "--sites", "3", "--paths-per-site", "10",
                     "--out", str(tmp_path / f"{name}.ndjson")]) == 0
    assert (tmp_path / "a.ndjson").read_bytes() == (tmp_path / "b.ndjson").read_bytes()
    assert (tmp_path / "a.ndjson.grammar.json").exists()


def test_output_parents_are_created(tmp_path):
    out = tmp_path / "new" / "dir" / "c.ndjson"
    assert main(["synth", "--sites", "2", "--paths-per-site", "5", "--out", str(out)]) == 0
    assert out.exists() and (tmp_path / "new" / "dir" / "c.ndjson.manifest.json").exists()


def test_fetch_needs_live(tmp_path, capsys):
    assert main(["fetch", "--domain", "example.com", "--out", str(tmp_path / "x.ndjson")]) == 2
    assert "--live" in capsys.readouterr().err


def test_missing_input(tmp_path, capsys):
    assert main(["stats", "--corpus", str(tmp_path / "nope.ndjson")]) == 2
    assert "not found" in capsys.readouterr().err


def test_negative_budget(tmp_path):
    corpus = tmp_path / "c.ndjson"
    main(["synth", "--sites", "2", "--paths-per-site", "5", "--out", str(corpus)])
    assert main(["simulate", "--targets", str(corpus), "--strategy", "breadth", "--budget", "-1",
                 "--out", str(tmp_path / "o")]) == 2


def test_missing_strategy_input(tmp_path, capsys):
    corpus = tmp_path / "c.ndjson"
    main(["synth", "--sites", "2", "--paths-per-site", "5", "--out", str(corpus)])
    assert main(["simulate", "--targets", str(corpus), "--strategy", "prob", "--out", str(tmp_path / "o")]) == 2
    assert "--tree" in capsys.readouterr().err


def test_runtime_error(tmp_path, capsys):
    bad = tmp_path / "bad.ndjson"
    bad.write_text("{not json\n")
    assert main(["stats", "--corpus", str(bad)]) == 1
    assert capsys.readouterr().err.startswith("dirlm stats: error:")


def test_config_unknown_key(tmp_path, capsys):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"sites": 2, "bogus": 1}))
    assert main(["synth", "--config", str(cfg), "--out", str(tmp_path / "x")]) == 2
    assert "bogus" in capsys.readouterr().err


def test_config_for_other_command(tmp_path):
    main(["synth", "--sites", "2", "--paths-per-site", "5", "--out", str(tmp_path / "c.ndjson")])
    assert main(["stats", "--config", str(tmp_path / "c.ndjson.manifest.json")]) == 2


def test_flags_override_config(tmp_path):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"sites": 2, "paths_per_site": 5, "out": str(tmp_path / "from_cfg.ndjson")}))
    assert main(["synth", "--config", str(cfg), "--sites", "3", "--out", str(tmp_path / "flag.ndjson")]) == 0
    assert not (tmp_path / "from_cfg.ndjson").exists()
    assert len((tmp_path / "flag.ndjson").read_text().splitlines()) > 0
    manifest = json.loads((tmp_path / "flag.ndjson.manifest.json").read_text())
    assert manifest["config"]["sites"] == 3


def test_stats_to_stdout(tmp_path, capsys):
    corpus = tmp_path / "c.ndjson"
    main(["synth", "--sites", "2", "--paths-per-site", "5", "--out", str(corpus)])
    capsys.readouterr()
    assert main(["stats", "--corpus", str(corpus)]) == 0
    assert capsys.readouterr().out.startswith("feature,value\nn_domains,2\n")
    assert sorted(os.listdir(tmp_path)) == ["c.ndjson", "c.ndjson.grammar.json", "c.ndjson.manifest.json"]


def test_simulate_outputs(runs):
    first, _ = runs
    sim = first / "sim_breadth"
    traces = sorted(os.listdir(sim / "traces"))
    assert traces and all(t.endswith(".csv") for t in traces)
    assert (sim / "traces" / traces[0]).read_text().startswith("index,path,hit\n")
    manifest = json.loads((sim / "manifest.json").read_text())
    assert manifest["command"] == "simulate" and manifest["config"]["strategy"] == "breadth"
    assert set(manifest["inputs"]) == {str(first / "split" / "test.ndjson"), str(first / "wl.txt")}
    result = json.loads((sim / "result.json").read_text())
    assert result["strategy"] == "breadth"


def test_report_outputs(runs):
    first, _ = runs
    rows = (first / "report" / "results.csv").read_text().splitlines()
    assert rows[0].endswith("improvement_pct") and len(rows) == 4
    assert [r.split(",")[0] for r in rows[1:]] == ["breadth", "prob", "lm"]


def test_manifest_replay_is_identical(runs):
    first, second = runs
    a, b = artefacts(first), artefacts(second)
    assert sorted(a) == sorted(b) and a == b
    assert (first / "model" / "model.ckpt").read_bytes() == (second / "model" / "model.ckpt").read_bytes()
