from __future__ import annotations

import json
from importlib import resources

import jsonschema
import pytest

from epikit.cli import bundled_models, main

SCHEMAS = {p.name[:-5]: json.loads(p.read_text(encoding="utf-8"))
           for p in (resources.files("epikit") / "schemas").iterdir() if p.name.endswith(".json")}

MOGHADAS_FIX = ["--fix", "lam=1", "--fix", "b=1/4", "--fix", "gt=1", "--fix", "betaxi=4*beta"]


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def run_json(capsys, *argv):
    code, out, err = run(capsys, *argv, "--json")
    assert code == 0, err
    payload = json.loads(out)
    jsonschema.validate(payload, SCHEMAS[payload["command"]])
    return payload


def test_every_command_has_a_schema():
    assert set(SCHEMAS) == {"check", "dfe", "ngm", "r0", "rur", "fixed-points", "crn", "kernel", "geometry",
                            "bifurcate-scan", "bifurcate-bt", "simulate"}
    for schema in SCHEMAS.values():
        jsonschema.Draft202012Validator.check_schema(schema)


@pytest.mark.parametrize("argv", [
    ("check", "lorenz"),
    ("check", "hethcote"),
    ("dfe", "seir"),
    ("ngm", "sair"),
    ("r0", "slair"),
    ("rur", "hethcote", "--keep", "i"),
    ("fixed-points", "moghadas", *MOGHADAS_FIX, "--fix", "beta=0.32"),
    ("crn", "sirvs7"),
    ("kernel", "sair_ph", "--draws", "3"),
    ("geometry", "hethcote"),
    ("bifurcate", "scan", "moghadas", *MOGHADAS_FIX, "--free", "beta", "--range", "0.2:0.24", "--points", "5"),
    ("bifurcate", "bt", "moghadas", "--fix", "lam=1", "--fix", "b=1/4", "--fix", "betaxi=4*beta",
     "--free", "beta,gt", "--box", "0.05:0.08,0.3:0.36", "--grid", "3"),
    ("simulate", "hethcote", "--fix", "beta=2", "--fix", "gam=1/2", "--fix", "lam=1/4",
     "--init", "0.9,0.1,0", "--t-end", "2", "--dt", "0.5"),
])
def test_json_output_matches_schema(capsys, argv):
    payload = run_json(capsys, *argv)
    assert payload["model"]


def test_check_reports_lorenz_violation(capsys):
    p = run_json(capsys, "check", "lorenz")
    assert p["result"]["ok"] is False
    assert p["result"]["violations"] == [{"equation": 2, "variable": "y", "term": "-x*z"}]


def test_r0_reports_both_thresholds(capsys):
    p = run_json(capsys, "r0", "hethcote")["result"]
    assert p["loci_agree"] is True
    assert p["draws_checked"] == 20
    assert p["R_N"] == p["R_J"]


def test_crn_text_and_dot(capsys, tmp_path):
    dot = tmp_path / "g.dot"
    code, out, _ = run(capsys, "crn", "hethcote_closed", "--dot", str(dot))
    assert code == 0
    assert "deficiency=1" in out
    assert dot.read_text().startswith("digraph")


def test_scan_and_simulate_write_csv(capsys, tmp_path):
    scan = tmp_path / "scan.csv"
    code, _, _ = run(capsys, "bifurcate", "scan", "moghadas", *MOGHADAS_FIX, "--free", "beta",
                     "--range", "0.2:0.24", "--points", "5", "--csv", str(scan))
    assert code == 0
    assert scan.read_text().splitlines()[0] == "beta,branch_id,s,i,max_real_eig,classification"
    traj = tmp_path / "t.csv"
    code, _, _ = run(capsys, "simulate", "hethcote", "--fix", "beta=2", "--fix", "gam=1/2", "--fix", "lam=1/4",
                     "--init", "0.9,0.1,0", "--t-end", "1", "--dt", "0.5", "--csv", str(traj))
    assert code == 0
    assert len(traj.read_text().splitlines()) == 4


def test_output_flag_writes_file(capsys, tmp_path):
    out = tmp_path / "r.json"
    code, stdout, _ = run(capsys, "dfe", "hethcote", "--json", "-o", str(out))
    assert code == 0 and stdout == ""
    assert json.loads(out.read_text())["result"]["equilibria"] == [{"s": "1", "i": "0", "r": "0"}]


def test_model_file_path(capsys, tmp_path):
    f = tmp_path / "decay.mod"
    f.write_text("model decay\nvars x\neq x' = -x\n")
    code, out, _ = run(capsys, "crn", str(f))
    assert code == 0 and "x -> 0" in out


def test_deterministic_output(capsys):
    a = run_json(capsys, "r0", "sair", "--seed", "7")
    b = run_json(capsys, "r0", "sair", "--seed", "7")
    assert a == b


def test_list_models(capsys):
    code, out, _ = run(capsys, "--list-models")
    assert code == 0
    assert out.split() == bundled_models()


@pytest.mark.parametrize("argv", [
    ("dfe", "no_such_model"),
    ("dfe", "hethcote", "--fix", "zeta=1"),
    ("dfe", "hethcote", "--fix", "beta"),
    ("fixed-points", "hethcote"),
    ("bifurcate", "scan", "moghadas", "--free", "beta"),
    ("bifurcate", "bt", "moghadas", "--free", "beta", "--box", "0:1,0:1"),
    ("kernel", "hethcote"),
    ("rur", "hethcote", "--keep", "q"),
    ("dfe", "hethcote", "--infectious", "q"),
    (),
])
def test_usage_errors_exit_2(capsys, argv):
    code, _, err = run(capsys, *argv)
    assert code == 2
    assert err


@pytest.mark.parametrize("argv", [
    ("dfe", "sirvs7", "--expect-unique-dfe"),
    ("ngm", "lorenz"),
    ("crn", "lorenz"),
    ("rur", "hethcote_closed"),
])
def test_analysis_errors_exit_1(capsys, argv):
    code, _, err = run(capsys, *argv)
    assert code == 1
    assert err.startswith("error")


def test_malformed_model_file_exit_1(capsys, tmp_path):
    f = tmp_path / "bad.mod"
    f.write_text("model bad\nvars x\neq x' = 1 +\n")
    code, _, err = run(capsys, "check", str(f))
    assert code == 1
    assert "line 3" in err
