import io
import json
import subprocess
import sys

import jsonschema
import pytest

from modalwb.cli import EXIT_FAIL, EXIT_OK, EXIT_USAGE, load_schema, run
from modalwb.kripke import Frame2, Model
from modalwb.omega.symbolic import builtin_witness


def call(*argv):
    out = io.StringIO()
    code = run(list(argv), out=out)
    return code, out.getvalue()


def call_json(*argv):
    code, text = call(*argv, "--json")
    return code, json.loads(text)


def validate(rep, schema=None):
    jsonschema.validate(rep, load_schema(schema or rep["kind"]))


@pytest.fixture
def model_file(tmp_path):
    fr = Frame2.from_pairs(3, [(0, 1), (1, 2), (0, 2)], [(0, 0), (1, 1), (2, 2)])
    path = tmp_path / "model.json"
    path.write_text(json.dumps(Model.from_sets(fr, {"p": [1], "t": [0, 2]}).to_json()))
    return path


# -- exit codes -------------------------------------------------------------------------

def test_eval(model_file):
    code, rep = call_json("eval", "--model", str(model_file), "--formula", "<0>p")
    assert code == EXIT_OK and rep["truth_set"] == [0]
    validate(rep)


def test_eval_formula_file(model_file, tmp_path):
    f = tmp_path / "f.txt"
    f.write_text("[0]\n  ~p")
    code, rep = call_json("eval", "--model", str(model_file), "--formula", f"@{f}")
    assert code == EXIT_OK and rep["truth_set"] == [1, 2]


def test_probe_passes():
    code, rep = call_json("probe", "--formula", "corpus:phi_inf",
                          "--class", "wcon0,lcom,rcom,conf", "--max-size", "2")
    assert code == EXIT_OK and rep["passed"]
    assert "elapsed" not in json.dumps(rep)
    validate(rep)


def test_probe_counterexample_exits_one():
    code, rep = call_json("probe", "--formula", "<0>p", "--class", "wcon0", "--max-size", "2")
    assert code == EXIT_FAIL and not rep["passed"]
    validate(rep)
    validate(rep["records"][0]["counterexample"], "model")


def test_probe_timing_flag():
    _, rep = call_json("probe", "--formula", "p", "--class", "lcom", "--max-size", "1", "--timing")
    assert "elapsed" in json.dumps(rep)


def test_probe_product_and_random():
    code, rep = call_json("probe", "--formula", "corpus:fasc", "--product-only",
                          "--first", "transitive", "--max-size", "2")
    assert code == EXIT_OK
    validate(rep)
    code, rep = call_json("probe", "--formula", "corpus:psi_inf", "--class", "wcon0,ptrans1,lcom",
                          "--max-size", "4", "--min-size", "4", "--mode", "random",
                          "--samples", "500", "--seed", "3")
    assert code == EXIT_OK
    validate(rep)


@pytest.mark.parametrize("argv", [
    ["probe", "--formula", "p", "--class", "lcom", "--max-size", "9"],
    ["probe", "--formula", "p", "--class", "bogus", "--max-size", "1"],
    ["probe", "--formula", "p", "--max-size", "1"],
    ["probe", "--formula", "corpus:nope", "--class", "lcom", "--max-size", "1"],
    ["probe", "--formula", "p", "--class", "lcom", "--max-size", "-1"],
    ["nosuchcommand"],
    ["claims", "--claim", "nope"],
    ["witness", "--name", "nope", "--formula", "p"],
    ["eval", "--model", "/nonexistent.json", "--formula", "p"],
])
def test_usage_errors(argv):
    assert call(*argv)[0] == EXIT_USAGE


def test_syntax_error_reports_position(tmp_path, capsys):
    f = tmp_path / "bad.txt"
    f.write_text("p &\n  (q | ")
    code, _ = call("probe", "--formula", f"@{f}", "--class", "lcom", "--max-size", "1")
    assert code == EXIT_USAGE
    err = capsys.readouterr().err
    assert str(f) in err and "line 2" in err and "column" in err


def test_malformed_json_reports_position(tmp_path, capsys):
    bad = tmp_path / "m.json"
    bad.write_text('{"worlds": 2,\n "r0": [[0, 1]\n}')
    code, _ = call("eval", "--model", str(bad), "--formula", "p")
    assert code == EXIT_USAGE
    err = capsys.readouterr().err
    assert str(bad) in err and "line 3" in err


def test_malformed_content_reported(tmp_path, capsys):
    bad = tmp_path / "m.json"
    bad.write_text('{"worlds": 2, "r0": [[0, 5]], "r1": []}')
    assert call("eval", "--model", str(bad), "--formula", "p")[0] == EXIT_USAGE
    assert str(bad) in capsys.readouterr().err


def test_props(model_file, tmp_path):
    fr = tmp_path / "f.json"
    fr.write_text(json.dumps(Frame2.from_pairs(2, [(0, 1)], [(1, 0)]).to_json()))
    code, rep = call_json("props", "--frame", str(fr), "--conditions", "trans0,lcom")
    assert code == EXIT_FAIL
    validate(rep)
    assert [v["satisfied"] for v in rep["verdicts"]] == [True, False]
    code, rep = call_json("props", "--model", str(model_file), "--root", "0",
                          "--conditions", "trans0,wcon_minus_M")
    assert code in (EXIT_OK, EXIT_FAIL)
    validate(rep)
    assert call("props", "--frame", str(fr), "--conditions", "wcon_minus_M")[0] == EXIT_USAGE


# -- symbolic commands -------------------------------------------------------------------

def test_witness_member():
    code, rep = call_json("witness", "--name", "lemma_sattwo", "--formula", "corpus:psi_inf")
    assert code == EXIT_OK and rep["member"] is True
    validate(rep)


def test_witness_non_member_exits_one():
    code, rep = call_json("witness", "--name", "lemma_sattwo", "--formula", "corpus:psi_inf",
                          "--target", '{"m": 3, "k": 0}')
    assert code == EXIT_FAIL and rep["member"] is False
    validate(rep)


def test_witness_text_output():
    code, text = call("witness", "--name", "lemma_satone", "--formula", "corpus:phi_inf")
    assert code == EXIT_OK
    assert "member: true" in text and text.rstrip().endswith("passed: true")


def test_witness_model_file(tmp_path):
    path = tmp_path / "sm.json"
    path.write_text(json.dumps(builtin_witness("lemma_sattwo").to_json()))
    validate(json.loads(path.read_text()), "symbolic_model")
    code, rep = call_json("witness", "--model", str(path), "--formula", "corpus:psi_inf",
                          "--target", '{"m": "omega", "k": 0}')
    assert code == EXIT_OK and rep["member"] is True


def test_bad_region_expression(tmp_path, capsys):
    path = tmp_path / "sm.json"
    path.write_text(json.dumps({"first": "omega1_desc", "second": "onestep",
                                "valuation": {"p": {"atom": "m_ge_c"}}}))
    assert call("witness", "--model", str(path), "--formula", "p")[0] == EXIT_USAGE
    assert str(path) in capsys.readouterr().err


def test_extract():
    code, rep = call_json("extract", "--name", "lemma_satone", "--kind", "phi", "--steps", "5")
    assert code == EXIT_OK and len(rep["steps"]) == 5
    validate(rep)
    code, rep = call_json("extract", "--name", "fasc_witness", "--kind", "phi", "--steps", "2")
    assert code == EXIT_FAIL and rep["error"] == "construction_stuck"
    validate(rep)


def test_crosscheck():
    code, rep = call_json("crosscheck", "--name", "lemma_satone", "--formula", "corpus:phi_inf",
                          "--window", "8")
    assert code == EXIT_OK and rep["disagreement_count"] == 0
    validate(rep)


def test_claims():
    code, rep = call_json("claims", "--claim", "trans", "--samples", "300")
    assert code == EXIT_OK
    validate(rep)
    code, rep = call_json("claims", "--claim", "all", "--samples", "100")
    assert code == EXIT_OK and len(rep["reports"]) == 6
    validate(rep)


def test_verify_all_subset(capsys):
    code, rep = call_json("verify-all", "--only", "11")
    assert code == EXIT_OK
    validate(rep)
    assert "[PASS] criterion 11" in capsys.readouterr().err


# -- determinism and entry points ---------------------------------------------------------

@pytest.mark.parametrize("argv", [
    ["probe", "--formula", "corpus:psi_inf", "--class", "wcon0,ptrans1,lcom", "--max-size", "5",
     "--min-size", "4", "--mode", "random", "--samples", "400", "--seed", "11"],
    ["claims", "--claim", "comm_c", "--samples", "200", "--seed", "5"],
    ["witness", "--name", "fdesc_witness", "--formula", "corpus:fdesc"],
])
def test_output_is_byte_identical(argv):
    assert call(*argv, "--json") == call(*argv, "--json")


def test_json_flag_before_subcommand():
    assert call("--json", "claims", "--claim", "trans", "--samples", "50")[1].startswith("{")


def test_module_entry_point():
    res = subprocess.run([sys.executable, "-m", "modalwb", "claims", "--claim", "trans",
                          "--samples", "50"], capture_output=True, text=True)
    assert res.returncode == 0 and "passed: true" in res.stdout


@pytest.mark.parametrize("name", ["frame2", "model", "point", "region_expr", "symbolic_model",
                                  "eval", "props", "campaign", "witness", "claim", "claims",
                                  "chain", "crosscheck", "verify"])
def test_schemas_are_valid(name):
    jsonschema.Draft7Validator.check_schema(load_schema(name))
