import json
import logging
import subprocess
import sys
from fractions import Fraction

import pytest

from fieldred import cli
from fieldred.cache import ReportCache, cache_key
from fieldred.errors import InvariantViolation
from fieldred.report import Report, fmt


def run_cli(argv, capsys):
    status = cli.main(argv)
    return status, capsys.readouterr().out


def test_spread_build_report(capsys, tmp_path):
    out_file = tmp_path / "d.txt"
    status, text = run_cli(["spread", "build", "--q", "2", "--t", "2", "--r", "2", "--spread-file-out", str(out_file)], capsys)
    assert status == cli.EXIT_OK
    assert "elements: 5" in text and "version: " in text and "budget_nodes: 10000000" in text
    assert len([l for l in out_file.read_text().splitlines() if l.strip()]) >= 5


def test_exit_codes(capsys):
    assert run_cli(["spread", "build", "--q", "6", "--t", "2", "--r", "2"], capsys)[0] == cli.EXIT_PRECONDITION
    assert run_cli(["subspread", "build", "--q", "2", "--t", "4", "--tprime", "3", "--r", "2"], capsys)[0] == cli.EXIT_PRECONDITION
    status, text = run_cli(["spread", "check", "--q", "3", "--t", "2", "--r", "2", "--family", "hall", "--budget-nodes", "10"], capsys)
    assert status == cli.EXIT_UNKNOWN and "unknown" in text
    status, text = run_cli(["singer", "orbits", "--q", "2", "--n", "4", "--d", "3"], capsys)
    assert status == cli.EXIT_OK and "orbit_list: []" in text


def test_t5_condition_with_default_budget(capsys):
    status, text = run_cli(["linset", "condition", "--q", "2", "--t", "5", "--r", "2", "--family", "pseudoregulus", "--count-only"], capsys)
    assert status == cli.EXIT_OK
    assert "verdict_A: false" in text and "X: unknown" in text and "X_lower_bound: " in text


def test_invariant_exit_code(capsys, monkeypatch):
    def broken(args, rep):
        raise InvariantViolation("forced")

    monkeypatch.setitem(cli.HANDLERS, ("field", None), broken)
    status, text = run_cli(["field", "--q", "4"], capsys)
    assert status == cli.EXIT_INVARIANT and "kind: invariant" in text


def test_cache_hit_is_identical(capsys, tmp_path, caplog):
    argv = ["spread", "stabilizer", "--q", "2", "--t", "2", "--r", "2", "--cache-dir", str(tmp_path)]
    s1, first = run_cli(argv, capsys)
    assert len(list(tmp_path.glob("*.json"))) == 1
    with caplog.at_level(logging.INFO, logger="fieldred"):
        s2, second = run_cli(argv + ["-v"], capsys)
    assert s1 == s2 == 0 and first == second
    assert any("cache hit" in r.message for r in caplog.records)


def test_version_bump_misses(capsys, tmp_path, monkeypatch):
    argv = ["field", "--q", "8", "--cache-dir", str(tmp_path)]
    run_cli(argv, capsys)
    old = cli.__version__
    monkeypatch.setattr(cli, "__version__", "9.9.9")
    _, text = run_cli(argv, capsys)
    assert "version: 9.9.9" in text
    versions = {json.loads(p.read_text())["version"] for p in tmp_path.glob("*.json")}
    assert versions == {old, "9.9.9"}


def test_corrupt_entry_recomputed(capsys, tmp_path, caplog):
    argv = ["field", "--q", "9", "--cache-dir", str(tmp_path)]
    _, fresh = run_cli(argv, capsys)
    (entry,) = tmp_path.glob("*.json")
    entry.write_text("{not json")
    with caplog.at_level(logging.WARNING):
        _, again = run_cli(argv, capsys)
    assert again == fresh
    assert any("corrupt" in r.message for r in caplog.records)
    assert json.loads(entry.read_text())["payload"]["text"] == fresh


def test_sampled_runs_not_cached(capsys, tmp_path):
    argv = ["subspread", "check", "--q", "2", "--t", "4", "--tprime", "2", "--r", "2", "--samples", "50", "--cache-dir", str(tmp_path)]
    assert run_cli(argv, capsys)[0] == cli.EXIT_OK
    assert not list(tmp_path.glob("*.json"))


def test_failed_runs_not_cached(capsys, tmp_path):
    run_cli(["spread", "build", "--q", "6", "--t", "2", "--r", "2", "--cache-dir", str(tmp_path)], capsys)
    assert not list(tmp_path.glob("*.json"))


def test_cache_key_ignores_output_path():
    assert cache_key("a", {"q": 2}, "1") == cache_key("a", {"q": 2}, "1")
    assert cache_key("a", {"q": 2}, "1") != cache_key("a", {"q": 2}, "2")


def test_cache_key_mismatch_is_discarded(tmp_path):
    c = ReportCache(tmp_path)
    c.put("abc", "x", {}, "1", {"text": "t", "status": 0})
    (tmp_path / "abc.json").rename(tmp_path / "def.json")
    assert c.get("def") is None and not (tmp_path / "def.json").exists()


@pytest.mark.parametrize(
    "argv",
    [
        ["field", "--q", "16"],
        ["spread", "check", "--q", "2", "--t", "2", "--r", "2", "--family", "pgl-image", "--seed", "4"],
        ["singer", "orbits", "--q", "2", "--n", "4", "--d", "2"],
        ["linset", "condition", "--q", "2", "--t", "3", "--r", "2", "--family", "pseudoregulus"],
        ["embed", "check", "--q", "2", "--t", "2", "--r", "2"],
    ],
)
def test_deterministic_reports(argv, capsys):
    assert run_cli(argv, capsys)[1] == run_cli(argv, capsys)[1]


def test_module_entry_point(tmp_path):
    out = tmp_path / "r.txt"
    res = subprocess.run([sys.executable, "-m", "fieldred", "singer", "build", "--q", "2", "--n", "4", "--out", str(out)],
                         capture_output=True, text=True)
    assert res.returncode == 0 and out.read_text().startswith("section: config")


def test_report_formatting():
    assert fmt(True) == "true" and fmt(None) == "none" and fmt(Fraction(3, 2)) == "3/2"
    rep = Report()
    rep.section("a", {"x": 1}, lines=["raw"])
    rep.section("b", {"y": [1, 2]})
    text = rep.render()
    assert text.endswith("\n") and "\n---\n" in text and "raw" in text
    assert Report.from_payload(rep.to_payload()).render() == text
