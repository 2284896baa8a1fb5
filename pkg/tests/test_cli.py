import io
import json
import subprocess
import sys

import pytest

from minsurf4.cli import main

STRIP = ["--domain", "0.5,1.5,-0.5,0.5"]


def run(argv):
    out = io.StringIO()
    code = main(argv, stdout=out)
    return code, out.getvalue()


def run_json(argv):
    code, text = run(argv)
    return code, json.loads(text)


def stable(doc):
    return json.dumps({k: v for k, v in doc.items() if k != "meta"}, sort_keys=True)


# ---------------------------------------------------------------- liouville

def test_liouville_pass():
    code, doc = run_json(["liouville", "--w", "z", "--domain", "-1,1,-1,1", "--n", "101"])
    assert code == 0 and doc["pass"]
    assert [r["h"] for r in doc["reports"]] == [0.02, 0.01]
    assert 1.8 <= doc["orders"]["liouville"]["order"] <= 2.2


def test_document_layout():
    _, doc = run_json(["liouville", "--w", "exp(z)", "--n", "21"])
    assert list(doc) == ["command", "config", "reports", "orders", "checks", "pass", "meta"]
    assert set(doc["meta"]) == {"version", "timestamp"}
    assert set(doc["reports"][0]) == {"equation", "h", "n_valid", "max_abs", "mean_abs",
                                      "max_rel"}


def test_config_holds_only_relevant_fields():
    _, doc = run_json(["liouville", "--w", "z", "--n", "11"])
    assert set(doc["config"]) == {"command", "w", "domain", "n", "exclude", "out", "tol"}


def test_implicit_multiplication_exit_2(capsys):
    code, out = run(["liouville", "--w", "2z"])
    err = capsys.readouterr().err
    assert code == 2 and out == ""
    assert "offset 1" in err and "2z" in err and "^" in err


def test_unknown_identifier_exit_2(capsys):
    code, _ = run(["verify", "--w1", "z", "--w2", "zz"])
    assert code == 2 and "--w2" in capsys.readouterr().err


def test_masked_center():
    code, doc = run_json(["liouville", "--w", "z^2", "--domain", "-0.1,0.1,-0.1,0.1",
                          "--n", "5"])
    assert doc["reports"][0]["n_valid"] < 25
    assert doc["checks"]["masked"] == {"derivative zero": 1}
    # four valid stencils next to a zero of w' cannot show second order
    assert code == 1 and not doc["pass"]


def test_exclusion_flag_passes_square():
    code, doc = run_json(["liouville", "--w", "z^2", "--exclude", "0.5"])
    assert code == 0 and doc["pass"]


def test_all_singular_exit_3(capsys):
    code, _ = run(["liouville", "--w", "1/(z-z)", "--n", "5"])
    err = capsys.readouterr().err
    assert code == 3 and "pole" in err and "z = " in err


@pytest.mark.parametrize("argv", [["liouville", "--w", "z", "--n", "4"],
                                  ["liouville", "--w", "z", "--domain", "1,0,0,1"],
                                  ["liouville", "--w", "z", "--domain", "0,1,0"],
                                  ["liouville"]])
def test_usage_errors_exit_2(argv):
    assert run(argv)[0] == 2


def test_tol_override_fails():
    code, doc = run_json(["liouville", "--w", "z", "--tol", "1e-9"])
    assert code == 1 and not doc["pass"]


# ---------------------------------------------------------------- verify

def test_verify_eq2():
    code, doc = run_json(["verify", "--w1", "z", "--w2", "z^2", *STRIP, "--n", "101",
                          "--form", "eq2"])
    assert code == 0 and len(doc["reports"]) == 4
    assert doc["checks"]["identity_defect"] <= 1e-12


def test_verify_chain():
    code, doc = run_json(["verify", "--w1", "z", "--w2", "z^2", *STRIP, "--n", "101",
                          "--form", "chain"])
    assert code == 0 and len(doc["orders"]) == 8
    assert len(doc["reports"]) == 16


def test_verify_eq1():
    code, doc = run_json(["verify", "--w1", "exp(z)", "--w2", "z", *STRIP, "--form", "eq1"])
    assert code == 0
    assert sorted(doc["orders"]) == ["original.log_abs_kappa_minus_K",
                                     "original.log_abs_kappa_plus_K"]


def test_verify_symmetric_flags_kappa():
    code, doc = run_json(["verify", "--w1", "z", "--w2", "z"])
    assert code == 0 and doc["checks"]["kappa_identically_zero"]
    assert doc["orders"]["rewritten.log_ratio"]["below_floor"]


def test_verify_log_domain_exit_3(capsys):
    code, _ = run(["verify", "--w1", "z", "--w2", "exp(200*z)",
                   "--domain", "0.2,0.6,-0.2,0.2", "--n", "5"])
    err = capsys.readouterr().err
    assert code == 3 and "log domain" in err and "z = " in err


def test_verify_deterministic():
    argv = ["verify", "--w1", "z", "--w2", "exp(z)", *STRIP, "--n", "41"]
    a, b = run_json(argv)[1], run_json(argv)[1]
    assert stable(a) == stable(b)


# ---------------------------------------------------------------- curvature

def test_curvature_single_node():
    code, text = run(["curvature", "--w1", "z", "--w2", "z^2", "--domain", "1,1,0,0",
                      "--n", "1"])
    assert code == 0
    assert text == "x,y,K,kappa,p,q,valid\n1,0,-5,-3,1,4,1\n"


def test_curvature_symmetric_origin():
    _, text = run(["curvature", "--w1", "z", "--w2", "z", "--domain", "0,0,0,0", "--n", "1"])
    assert text.splitlines()[1] == "0,0,-16,0,4,4,1"


def test_curvature_singular_row():
    code, text = run(["curvature", "--w1", "z", "--w2", "z^2", "--domain", "-1,1,-1,1",
                      "--n", "3"])
    rows = text.splitlines()
    assert code == 0 and len(rows) == 10
    assert "0,0,,,,,0" in rows


def test_curvature_all_singular_exit_3(capsys):
    code, text = run(["curvature", "--w1", "z", "--w2", "z^2", "--domain", "0,0,0,0",
                      "--n", "1"])
    assert code == 3 and text.splitlines()[1] == "0,0,,,,,0"
    assert "singular" in capsys.readouterr().err


def test_curvature_to_file(tmp_path):
    path = tmp_path / "k.csv"
    code, text = run(["curvature", "--w1", "z", "--w2", "exp(z)", "--n", "5",
                      "--out", str(path)])
    assert code == 0 and text == ""
    assert len(path.read_text().splitlines()) == 26


# ---------------------------------------------------------------- gauge

def test_gauge_inversion():
    code, doc = run_json(["gauge", "--w", "z", "--a", "0,0", "--b", "1,0"])
    assert code == 0 and doc["checks"]["max_rel_deviation"] <= 1e-9
    assert doc["checks"]["transformed"]["w"] == "-1/z"


def test_gauge_identity_zero_deviation():
    code, doc = run_json(["gauge", "--w", "z", "--a", "1,0", "--b", "0,0"])
    assert code == 0 and doc["checks"]["max_rel_deviation"] == 0


def test_gauge_normalization_exit_4(capsys):
    code, out = run(["gauge", "--w", "z", "--a", "1,0", "--b", "1,0"])
    err = capsys.readouterr().err
    assert code == 4 and out == ""
    assert "|a|^2 + |b|^2 = 2" in err


def test_gauge_renormalize():
    code, doc = run_json(["gauge", "--w", "z", "--a", "1,0", "--b", "1,0", "--renormalize"])
    assert code == 0 and doc["config"]["renormalize"]


def test_gauge_pair():
    code, doc = run_json(["gauge", "--w1", "z", "--w2", "exp(z)", "--a1", "0.6,0",
                          "--b1", "0,0.8", "--a2", "0,1", "--b2", "0,0"])
    assert code == 0 and doc["checks"]["max_rel_deviation"] <= 1e-9


def test_gauge_bad_number_exit_2():
    assert run(["gauge", "--w", "z", "--a", "x,y"])[0] == 2


# ---------------------------------------------------------------- mesh

def test_mesh_enneper(tmp_path):
    path = tmp_path / "enneper.obj"
    code, doc = run_json(["mesh", "--w", "z", "--domain", "-1,1,-1,1", "--n", "101",
                          "--out", str(path)])
    assert code == 0
    lines = path.read_text().splitlines()
    assert sum(l.startswith("v ") for l in lines) == 10201
    assert sum(l.startswith("f ") for l in lines) == 20000
    assert doc["checks"]["vertices"] == 10201 and doc["checks"]["triangles"] == 20000


def test_mesh_singular_path_exit_5(capsys, tmp_path):
    code, out = run(["mesh", "--w", "z^2", "--out", str(tmp_path / "x.obj")])
    err = capsys.readouterr().err
    assert code == 5 and "z = 0j" in err and "(50, 50)" in err
    assert not (tmp_path / "x.obj").exists()


def test_mesh_2x2_stdout():
    code, text = run(["mesh", "--w", "z", "--n", "2", "--out", "-"])
    assert code == 0
    lines = text.splitlines()
    assert sum(l.startswith("v ") for l in lines) == 4
    assert sum(l.startswith("f ") for l in lines) == 2
    assert "{" not in text


def test_mesh_report_file(tmp_path):
    report = tmp_path / "r.json"
    code, text = run(["mesh", "--w", "exp(z)", "--n", "41", "--out", "-",
                      "--format", "ply", "--report", str(report)])
    assert code == 0 and text.startswith("ply\n")
    assert json.loads(report.read_text())["checks"]["format"] == "ply"


def test_mesh_basepoint_off_grid_exit_2():
    assert run(["mesh", "--w", "z", "--basepoint", "0.013,0"])[0] == 2


def test_mesh_basepoint_translation(tmp_path):
    code, doc = run_json(["mesh", "--w", "exp(z)", "--n", "41", "--basepoint", "-1,-1",
                          "--out", str(tmp_path / "a.obj")])
    assert code == 0 and doc["checks"]["basepoint"] == [-1.0, -1.0]


# ---------------------------------------------------------------- entry point

def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "minsurf4", "gauge", "--w", "z",
                           "--a", "1,0", "--b", "1,0"], capture_output=True, text=True)
    assert proc.returncode == 4 and proc.stdout == ""
    assert "normaliz" in proc.stderr or "|a|^2" in proc.stderr
