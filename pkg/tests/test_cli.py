import csv
import json
import xml.etree.ElementTree as ET

import pytest
from jsonschema import Draft202012Validator

from kfold import cli

SMALL_VERIFY = {
    "invariance_samples": 600,
    "n_boot": 20,
    "kfold_d": 2,
    "heisenberg_sites": 3,
    "trace_samples": 3,
    "schur_weyl": [[2, 2]],
    "hciz_problems": 2,
    "hciz_samples": 5000,
}


def _write(tmp_path, name, obj):
    p = tmp_path / name
    p.write_text(json.dumps(obj))
    return str(p)


def test_schema_is_valid_draft_2020_12():
    Draft202012Validator.check_schema(cli.load_schema())


def test_tables_outputs_and_discrepancies(tmp_path, capsys):
    out = tmp_path / "t"
    assert cli.main(["tables", "--k", "4", "--d", "4", "--out", str(out)]) == 0
    rep = json.loads((out / "tables_k4.json").read_text())
    mism = rep["discrepancies"]["mismatches"]
    c = [m for m in mism if m["table"] == "c_coefficients"]
    assert c == [{"table": "c_coefficients", "key": "(2,2);+", "computed": 2, "published": 1}]
    assert rep["discrepancies"]["counts"]["s2_kronecker"] == 0
    with (out / "branching_k4_2x2.csv").open() as fh:
        rows = list(csv.reader(fh))
    assert rows[0] == ["mu", "lambda", "lambda2", "multiplicity"]
    assert len(rows) - 1 == 10
    assert rep["c_coefficients"]["sum_of_squares_collapsed"] == 16


def test_tables_cap(capsys):
    assert cli.main(["tables", "--k", "5"]) == cli.EXIT_CAP
    assert "resource limit" in capsys.readouterr().err


def test_audit(tmp_path):
    out = tmp_path / "a"
    assert cli.main(["audit", "--k", "2", "--d", "4", "--out", str(out)]) == 0
    rep = json.loads((out / "audit_k2.json").read_text())
    full = rep["rows"][0]["subsets"]["perm+half_swap"]
    assert (full["complex_commutant_dim"], full["hermitian_dim"]) == (16, 13)


def test_audit_cap():
    assert cli.main(["audit", "--k", "2", "--d", "9"]) == cli.EXIT_CAP


def test_unknown_key_reports_pointer(tmp_path, capsys):
    cfg = _write(tmp_path, "c.json", {"schema_version": 1, "seed": 1,
                                      "ensemble": {"variant": "GUE", "n": 4, "sizee": 2}})
    assert cli.main(["sample", "--config", cfg]) == cli.EXIT_CONFIG
    assert "/ensemble/sizee" in capsys.readouterr().err


def test_missing_variant_field_reports_pointer(tmp_path, capsys):
    cfg = _write(tmp_path, "c.json", {"schema_version": 1, "seed": 1, "ensemble": {"variant": "KFold", "k": 2}})
    assert cli.main(["sample", "--config", cfg]) == cli.EXIT_CONFIG
    assert "/ensemble/d" in capsys.readouterr().err


def test_wrong_schema_version(tmp_path, capsys):
    cfg = _write(tmp_path, "c.json", {"schema_version": 2, "seed": 1})
    assert cli.main(["verify", "--config", cfg]) == cli.EXIT_CONFIG
    assert "/schema_version" in capsys.readouterr().err


def test_seed_is_mandatory(capsys):
    assert cli.main(["verify"]) == cli.EXIT_CONFIG
    assert "/seed" in capsys.readouterr().err


def test_bad_flag_value(capsys):
    assert cli.main(["sample", "--seed", "1", "--samples", "0"]) == cli.EXIT_CONFIG
    assert "/samples" in capsys.readouterr().err


def test_invalid_json(tmp_path, capsys):
    p = tmp_path / "c.json"
    p.write_text("{not json")
    assert cli.main(["sample", "--config", str(p)]) == cli.EXIT_CONFIG


def test_env_threads_fallback(tmp_path, monkeypatch):
    cfg = {"schema_version": 1, "seed": 3, "samples": 4, "ensemble": {"variant": "GUE", "n": 4}}
    monkeypatch.setenv("KFOLD_THREADS", "zero")
    assert cli.main(["sample", "--config", _write(tmp_path, "c.json", cfg), "--out", str(tmp_path)]) == cli.EXIT_CONFIG
    monkeypatch.setenv("KFOLD_THREADS", "3")
    args = cli.make_parser().parse_args(["sample", "--config", _write(tmp_path, "c.json", cfg)])
    assert cli.build_config(args).threads == 3
    args = cli.make_parser().parse_args(["sample", "--config", _write(tmp_path, "c.json", cfg), "--threads", "2"])
    assert cli.build_config(args).threads == 2


def test_sample_then_analyze(tmp_path):
    cfg = _write(tmp_path, "c.json", {
        "schema_version": 1, "seed": 11, "samples": 20,
        "ensemble": {"variant": "GUE", "n": 32},
        "analysis": {"unfold_degree": 5, "compare_gue": True},
    })
    s_out, a_out = tmp_path / "s", tmp_path / "an"
    assert cli.main(["sample", "--config", cfg, "--out", str(s_out), "--format", "json,csv"]) == 0
    with (s_out / "batch.csv").open() as fh:
        header = next(csv.reader(fh))
    assert header[2:4] == ["h_0_0_re", "h_0_0_im"]
    assert cli.main(["analyze", "--config", cfg, "--batch", str(s_out / "batch.json"), "--out", str(a_out)]) == 0
    summ = json.loads((a_out / "summary.json").read_text())
    assert summ["schema_version"] == 1 and summ["aggregate"]["samples"] == 20
    assert "gue_comparison" in summ["aggregate"]
    for name in ("spacing_raw.svg", "spacing_unfolded.svg", "ratio.svg"):
        ET.fromstring((a_out / name).read_text())
    # analysing the same batch directly from the config gives the same statistics
    b_out = tmp_path / "b"
    assert cli.main(["analyze", "--config", cfg, "--out", str(b_out)]) == 0
    direct = json.loads((b_out / "summary.json").read_text())
    assert direct["aggregate"]["mean_ratio"] == summ["aggregate"]["mean_ratio"]


@pytest.mark.parametrize("ens", [
    {"variant": "KFold", "k": 2, "d": 2, "precision": {"kind": "random", "seed": 2}},
    {"variant": "KFold", "k": 2, "d": 2, "precision": {"kind": "identity", "lambda": 2.0}},
    {"variant": "Heisenberg", "sites": 4, "noise_scale": 0.3},
    {"variant": "O3Model", "sites": 2},
    {"variant": "QuantumDouble", "group": "Z2"},
    {"variant": "PowerFold", "k": 2, "n": 3},
    {"variant": "TensorProductGUE", "dims": [2, 3]},
    {"variant": "Poisson", "n": 10},
    {"variant": "GOE", "n": 6},
])
def test_sample_every_variant(tmp_path, ens):
    cfg = _write(tmp_path, "c.json", {"schema_version": 1, "seed": 5, "samples": 3, "ensemble": ens})
    assert cli.main(["sample", "--config", cfg, "--out", str(tmp_path)]) == 0
    assert len(json.loads((tmp_path / "batch.json").read_text())["samples"]) == 3


def test_not_positive_definite_is_config_error(tmp_path):
    # minus the identity in this family's orthonormal basis
    fam_cfg = {"variant": "KFold", "k": 1, "d": 2, "precision": {"kind": "coefficients", "coefficients": [1.75, 1.0]}}
    cfg = _write(tmp_path, "c.json", {"schema_version": 1, "seed": 5, "samples": 3, "ensemble": fam_cfg})
    assert cli.main(["sample", "--config", cfg, "--out", str(tmp_path)]) == cli.EXIT_CONFIG


def test_hciz_command(tmp_path):
    assert cli.main(["hciz", "--a", "0,1", "--b", "0,1", "--t", "1", "--seed", "2",
                     "--samples", "20000", "--out", str(tmp_path), "--format", "json,csv"]) == 0
    rep = json.loads((tmp_path / "hciz.json").read_text())
    assert abs(rep["exact"]["value"] - 1.718281828459045) < 1e-12
    assert rep["z"] < 4
    assert cli.main(["hciz", "--a", "0,1", "--b", "0", "--seed", "2"]) == cli.EXIT_CONFIG


def test_verify_small_is_deterministic(tmp_path):
    cfg = _write(tmp_path, "v.json", {"schema_version": 1, "seed": 4, "verify": SMALL_VERIFY})
    assert cli.main(["verify", "--config", cfg, "--out", str(tmp_path / "1")]) == 0
    assert cli.main(["verify", "--config", cfg, "--out", str(tmp_path / "2"), "--threads", "2"]) == 0
    a = (tmp_path / "1" / "verify.json").read_bytes()
    assert a == (tmp_path / "2" / "verify.json").read_bytes()
    rep = json.loads(a)
    assert rep["passed"] and {c["name"] for c in rep["checks"]} >= {"invariance/control_rejected", "hciz/monte_carlo"}


def test_verify_corrupted_precision_fails(tmp_path):
    opts = dict(SMALL_VERIFY, corrupt=True, checks=["invariance"], invariance_samples=2000)
    cfg = _write(tmp_path, "v.json", {"schema_version": 1, "seed": 4, "verify": opts})
    assert cli.main(["verify", "--config", cfg, "--out", str(tmp_path)]) == cli.EXIT_FAILED
    rep = json.loads((tmp_path / "verify.json").read_text())
    by_name = {c["name"]: c for c in rep["checks"]}
    assert not by_name["invariance/kfold"]["passed"]
    assert by_name["invariance/kfold"]["details"]["ratio"] > 3
