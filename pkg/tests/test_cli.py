import json
import subprocess
import sys

import jsonschema
import pytest

from opealg.cli import RunConfig, UsageError, main, parse_params, run
from opealg.presentation import data_path
from opealg.report import Item, SuiteReport, render
from mutations import mutated_text

SCHEMA = json.loads(data_path("report.schema.json").read_text())
FAST = ["ope-lc", "limit-a-infinity", "realize-small-n4", "reduce-first", "reduce-second"]


def cli(*args, capsys):
    code = main(list(args))
    out = capsys.readouterr()
    return code, out.out, out.err


@pytest.mark.parametrize("suite", FAST + ["validate-presentations"])
def test_json_report_matches_schema(suite, capsys):
    code, out, _ = cli("run", "--suite", suite, "--format", "json", capsys=capsys)
    doc = json.loads(out)
    jsonschema.validate(doc, SCHEMA)
    assert code == 0 and doc["ok"]
    assert doc["schema_hashes"]


def test_char_json_has_tables(capsys):
    code, out, _ = cli("char", "--check", "qhr1", "--order", "5", "--format", "json", capsys=capsys)
    doc = json.loads(out)
    jsonschema.validate(doc, SCHEMA)
    (rows,) = doc["tables"].values()
    assert code == 0 and rows and all(r["match"] for r in rows)


@pytest.mark.parametrize("suite", FAST)
def test_text_output_is_deterministic(suite, capsys):
    first = cli("run", "--suite", suite, capsys=capsys)
    second = cli("run", "--suite", suite, capsys=capsys)
    assert first == second
    assert first[1].splitlines()[-1].endswith("flagged")


def test_parallel_run_gives_the_same_report(capsys):
    one = cli("run", "--suite", "validate-presentations", capsys=capsys)
    four = cli("run", "--suite", "validate-presentations", "--jobs", "4", capsys=capsys)
    assert one == four


def test_failures_set_the_exit_code(tmp_path, capsys):
    path = tmp_path / "large_n4_L.ope"
    path.write_text(mutated_text(2))
    code, out, _ = cli("run", "--suite", "ope-lc", "--presentation", str(path), capsys=capsys)
    assert code == 1
    assert "[FAIL   ]" in out and "residual:" in out


def test_config_file_and_flag_precedence(tmp_path, capsys):
    cfg = tmp_path / "run.json"
    cfg.write_text(json.dumps({"suite": "char", "check": "supercharacter", "order": 4, "format": "json"}))
    code, out, _ = cli("run", "--config", str(cfg), capsys=capsys)
    assert code == 0 and json.loads(out)["config"] == {"check": "supercharacter", "order": 4}
    code, out, _ = cli("run", "--config", str(cfg), "--order", "6", "--format", "text", capsys=capsys)
    assert code == 0 and "config: check=supercharacter, order=6" in out


def test_params_specialize_the_tables(capsys):
    code, out, _ = cli("run", "--suite", "ope-lc", "--params", "k=1/5,a=3", capsys=capsys)
    assert code == 0 and "config: params=a=3,k=1/5" in out
    assert "-6*k-3" in out
    # -1 + k + a k vanishes here
    code, _, err = cli("run", "--suite", "ope-lc", "--params", "k=1/3,a=2", capsys=capsys)
    assert code == 2 and "pole" in err
    with pytest.raises(UsageError):
        parse_params("q=1")
    with pytest.raises(ValueError):
        parse_params("k=x")


@pytest.mark.parametrize("args", [
    ["run"],
    ["run", "--suite", "reduce-first", "--params", "k=1"],
    ["run", "--suite", "char", "--params", "z=1"],
])
def test_usage_errors_exit_2(args, capsys):
    code, _, err = cli(*args, capsys=capsys)
    assert code == 2 and err.startswith("opealg:")


def test_unknown_suite_and_check():
    with pytest.raises(UsageError):
        run("no-such-suite")
    with pytest.raises(UsageError):
        run("char", RunConfig(check="nope"))


def test_computation_errors_become_failed_items(tmp_path):
    path = tmp_path / "large_n4_L.ope"
    path.write_text(mutated_text(0).replace("ope L L\n  4:", "ope L L\n  4: undefined_gen +"))
    rep = run("validate-presentations", RunConfig(presentation=str(path)))
    assert not rep.ok
    (bad,) = rep.failures()
    assert bad.label == "large_n4_L.ope: load" and "undefined_gen" in bad.residual


def test_report_round_trip():
    rep = SuiteReport("x", [Item("a", "b", "flagged", note="n")], {"order": 3}, {"t": "0123456789abcdef"}, 0.5,
                      {"tbl": [(0, "1", 1, 1, True)]})
    doc = rep.to_dict()
    jsonschema.validate(doc, SCHEMA)
    assert SuiteReport.from_dict(doc).to_dict() == doc
    assert rep.ok and "[FLAGGED] a  <b>" in render(rep)
    with pytest.raises(ValueError):
        Item("a", "b", "maybe")


def test_console_script_entry_point():
    proc = subprocess.run([sys.executable, "-m", "opealg.cli", "suites"], capture_output=True, text=True, check=True)
    assert proc.stdout.split() == ["validate-presentations", "ope-lc", "limit-a-infinity", "realize-small-n4",
                                   "reduce-first", "reduce-second", "char"]
