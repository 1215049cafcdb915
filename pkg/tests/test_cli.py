import json
import subprocess
import sys

import pytest

from ontoenrich.cli import main

from conftest import GEOGRAPHY_JSON, GEOGRAPHY_NT, ORIGIN

CLOCK = "2024-01-01T00:00:00+00:00"


def run_enrich(tmp_path, *extra, name="out"):
    out = tmp_path / name
    code = main(["enrich", GEOGRAPHY_JSON, GEOGRAPHY_NT, "--out", str(out), "--fixed-clock", CLOCK, *extra])
    return code, out


def load(path):
    return json.loads(path.read_text())


# validate

def test_validate_good_fixture(capsys):
    assert main(["validate", GEOGRAPHY_JSON, GEOGRAPHY_NT]) == 0
    out = capsys.readouterr().out
    assert "13 instances" in out and "61 triples" in out


def test_validate_cycle(tmp_path, capsys):
    doc = json.loads(open(GEOGRAPHY_JSON).read())
    doc["subclass"].append({"child": "GE", "parent": "river"})
    bad = tmp_path / "cycle.json"
    bad.write_text(json.dumps(doc))
    assert main(["validate", str(bad)]) == 1
    err = capsys.readouterr().err
    assert "cycle" in err and "->" in err


def test_validate_missing_file(tmp_path):
    assert main(["validate", str(tmp_path / "nope.json")]) == 2


def test_validate_bad_ntriples(tmp_path, capsys):
    bad = tmp_path / "bad.nt"
    bad.write_text('<http://a> <http://b> "unterminated .\n')
    assert main(["validate", GEOGRAPHY_JSON, str(bad)]) == 1
    assert "line 1" in capsys.readouterr().err


# enrich

def test_enrich_golden(tmp_path, capsys):
    code, out = run_enrich(tmp_path, "--trace")
    assert code == 0
    assert "pairs=156 hits=3 new_assertions=3 schemas_after_collapse=1" in capsys.readouterr().out
    report = load(out / "report.json")
    c = report["counters"]
    assert (c["pairs"], c["hits"], c["new_assertions"], c["schemas_after_collapse"]) == (156, 3, 3, 1)
    [schema] = report["schemas"]
    assert (schema["predicate"], schema["dom"], schema["range"]) == (ORIGIN, "river", "NaturalGE")
    assert len(schema["support"]) == 3
    m = report["manifest"]
    assert m["created"] == CLOCK
    assert [i["role"] for i in m["inputs"]] == ["ontology", "store"]
    assert all(i["digest"].startswith("sha256:") for i in m["inputs"])
    assert "jobs" not in m["config"]
    assert len((out / "trace.jsonl").read_text().splitlines()) == 156
    assert (out / "ontology.json").exists()


def test_enriched_ontology_validates(tmp_path):
    _, out = run_enrich(tmp_path)
    assert main(["validate", str(out / "ontology.json")]) == 0


def test_enrich_unreachable_alpha(tmp_path):
    code, out = run_enrich(tmp_path, "--alpha", "1.1", "--similarity-mode", "mean")
    assert code == 0
    assert load(out / "report.json")["counters"]["hits"] == 0


def test_enrich_tiny_budget(tmp_path):
    code, out = run_enrich(tmp_path, "--scan-budget", "1", "--trace")
    assert code == 0
    assert load(out / "report.json")["counters"]["hits"] <= 3
    rows = [json.loads(l) for l in (out / "trace.jsonl").read_text().splitlines()]
    assert any(r["budget_exhausted"] for r in rows)
    assert all(r["triples_examined"] <= 1 for r in rows)


def test_config_file_and_flag_override(tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"alpha": 1.1, "window": 5}))
    _, out = run_enrich(tmp_path, "--config", str(cfg), name="a")
    report = load(out / "report.json")
    assert report["manifest"]["config"]["window"] == 5
    assert report["counters"]["hits"] == 0
    _, out = run_enrich(tmp_path, "--config", str(cfg), "--alpha", "0.125", name="b")
    assert load(out / "report.json")["counters"]["hits"] == 3


def test_config_file_unknown_key(tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"alfa": 0.2}))
    code, _ = run_enrich(tmp_path, "--config", str(cfg))
    assert code == 1


@pytest.mark.parametrize("flags", [["--alpha", "-1"], ["--min-evidence", "1"], ["--window", "-2"]])
def test_enrich_invalid_settings(tmp_path, flags):
    assert run_enrich(tmp_path, *flags)[0] == 1


def test_enrich_missing_store(tmp_path):
    code = main(["enrich", GEOGRAPHY_JSON, str(tmp_path / "none.nt"), "--out", str(tmp_path / "o")])
    assert code == 2


def test_enrich_lenient_skips_bad_lines(tmp_path, capsys):
    nt = tmp_path / "store.nt"
    nt.write_text(open(GEOGRAPHY_NT).read() + "_:b0 <http://x/p> <http://x/o> .\n")
    strict = main(["enrich", GEOGRAPHY_JSON, str(nt), "--out", str(tmp_path / "s")])
    assert strict == 1
    lenient = main(["enrich", GEOGRAPHY_JSON, str(nt), "--out", str(tmp_path / "l"), "--lenient"])
    assert lenient == 0
    assert "skipped" in capsys.readouterr().err


# report

def test_report_filter_by_predicate(tmp_path, capsys):
    _, out = run_enrich(tmp_path)
    capsys.readouterr()
    assert main(["report", str(out / "report.json"), "--predicate", "origin"]) == 0
    text = capsys.readouterr().out
    assert text.splitlines()[0] == "assertions: 3 rows"
    assert "Karun" in text and "NaturalGE" in text


def test_report_absent_predicate(tmp_path, capsys):
    _, out = run_enrich(tmp_path)
    capsys.readouterr()
    assert main(["report", str(out / "report.json"), "--predicate", "mouth"]) == 0
    assert capsys.readouterr().out.splitlines()[0] == "assertions: 0 rows"


def test_report_filter_by_concept(tmp_path, capsys):
    _, out = run_enrich(tmp_path)
    capsys.readouterr()
    main(["report", str(out / "report.json"), "--concept", "mountain"])
    assert capsys.readouterr().out.splitlines()[0] == "assertions: 1 rows"


def test_report_malformed(tmp_path):
    bad = tmp_path / "r.json"
    bad.write_text("{not json")
    assert main(["report", str(bad)]) == 1
    bad.write_text(json.dumps({"counters": {}}))
    assert main(["report", str(bad)]) == 1
    assert main(["report", str(tmp_path / "missing.json")]) == 2


def test_module_entry_point(tmp_path):
    proc = subprocess.run([sys.executable, "-m", "ontoenrich", "validate", GEOGRAPHY_JSON],
                          capture_output=True, text=True)
    assert proc.returncode == 0
    assert proc.stdout.startswith("ok:")
