import io
import json
import os

from conftest import instance_path
from locsplit import config
from locsplit.cli import EXIT_FAILURES, EXIT_INCONCLUSIVE, EXIT_OK, EXIT_USAGE, run


def invoke(*argv):
    out = io.StringIO()
    code = run(list(argv), stream=out)
    return code, [json.loads(line) for line in out.getvalue().splitlines()]


def test_check_t0_passes():
    code, records = invoke("check-t0", "--instance", instance_path("gauss.inst"), "--t0", "25")
    assert code == EXIT_OK
    assert records[0]["overall"] == "Pass"


def test_check_t0_fails():
    code, records = invoke("check-t0", "--instance", instance_path("gauss.inst"), "--t0", "45")
    assert code == EXIT_FAILURES
    assert records[0]["overall"] == "Fail"


def test_hilbert_symbol():
    code, records = invoke("hilbert", "-1", "-1", "--place", "2")
    assert code == EXIT_OK
    assert records == [{"a": "-1", "b": "-1", "v": "2", "symbol": -1}]


def test_reciprocity():
    code, records = invoke("reciprocity", "6", "-35")
    assert code == EXIT_OK
    assert records[0]["defect"] == "0"


def test_search_on_conflicting_instance_is_a_usage_error():
    code, records = invoke("search-t0", "--instance", instance_path("empty-S-conflict.inst"))
    assert code == EXIT_USAGE
    assert records[-1]["error"] == "InfeasibleAtPrecision"


def test_search_reports_hits_and_stats(tmp_path):
    manifest = tmp_path / "run.json"
    code, records = invoke(
        "search-t0", "--instance", instance_path("gauss-targets.inst"), "--bound", "100", "--manifest", str(manifest)
    )
    assert code == EXIT_OK
    assert "17" in [r["t0"] for r in records if "t0" in r]
    assert records[-1]["stats"]["hits"] >= 1
    assert json.loads(manifest.read_text())["exit_code"] == EXIT_OK


def test_search_is_reproducible():
    argv = ("search-t0", "--instance", instance_path("gauss-targets.inst"), "--bound", "60", "--seed", "3")
    assert invoke(*argv) == invoke(*argv)


def test_parse_error_record():
    code, records = invoke("split-prime", "--poly", "x^2+")
    assert code == EXIT_USAGE
    assert records[0]["error"] == "InstanceParseError"


def test_split_prime_and_almost_abelian():
    code, records = invoke("split-prime", "--poly", "x^3-2", "--exclude", "31")
    assert code == EXIT_OK
    assert records[0]["prime"] == 43
    code, records = invoke("almost-abelian", "--poly", "x^3-2")
    assert code == EXIT_OK
    assert records[0]["resolvent"] == "x**2 + 108"


def test_norm_multiplier_without_witness_is_inconclusive():
    code, records = invoke("norm-multiplier", "--poly", "x^2+1", "--S", "real,2", "--target", "real:1000:1", "--bound", "3")
    assert code == EXIT_INCONCLUSIVE
    assert records[0]["error"] == "NoWitnessFound"


def test_line_trick_command():
    code, records = invoke(
        "line-trick", "--dim", "2", "--exclude", "x1;x2", "--S", "real,3", "--target", "3:1,1:2", "--v0", "5"
    )
    assert code == EXIT_OK
    assert records[0]["checks"]["ok"]


def test_hh1_search_command():
    code, records = invoke("hh1-search", "--form", "x^2+y^2", "--S", "real,2", "--bound", "20")
    assert code == EXIT_OK
    assert {"lam": 1, "mu": 4} in [{"lam": r["lam"], "mu": r["mu"]} for r in records if "lam" in r]


def test_bare_cache_flag_uses_default_file(tmp_path, monkeypatch):
    path = os.path.abspath(instance_path("gauss.inst"))
    monkeypatch.chdir(tmp_path)
    first = invoke("check-t0", "--instance", path, "--t0", "25", "--cache")
    assert (tmp_path / config.FACTOR_CACHE_FILE).exists()
    assert invoke("check-t0", "--instance", path, "--t0", "25", "--cache") == first
    assert first[0] == EXIT_OK
