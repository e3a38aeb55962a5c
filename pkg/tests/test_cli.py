import json
import subprocess
import sys

import numpy as np
import pytest

from nbodycc.cli import main


def write_problem(path, **overrides):
    prob = {
        "n": 3,
        "d": 2,
        "masses": [1.0, 1.0, 1.0],
        "alpha": 1.0,
        "potential": {"type": "newtonian"},
        "solver": {"rng_seed": 7, "n_starts": 60},
    }
    prob.update(overrides)
    path.write_text(json.dumps(prob))
    return path


def test_census_report(tmp_path, capsys):
    prob = write_problem(tmp_path / "p.json")
    out = tmp_path / "report.json"
    csv = tmp_path / "classes.csv"
    assert main(["census", str(prob), "--out", str(out), "--csv", str(csv)]) == 0
    report = json.loads(out.read_text())
    assert report["tool"]["name"] == "nbodycc"
    assert report["n_classes"] == 5
    assert "problem_sha256" in report
    lines = csv.read_text().strip().splitlines()
    assert lines[0].startswith("class,u_value,lambda")
    assert len(lines) == 6


def test_census_stdout_and_flag_overrides(tmp_path, capsys):
    prob = write_problem(tmp_path / "p.json")
    assert main(["census", str(prob), "--starts", "10", "--seed", "3"]) == 0
    report = json.loads(capsys.readouterr().out)
    assert report["solver"]["n_starts"] == 10
    assert report["solver"]["rng_seed"] == 3


def test_census_byte_identical(tmp_path):
    prob = write_problem(tmp_path / "p.json")
    out1, out2 = tmp_path / "r1.json", tmp_path / "r2.json"
    csv1, csv2 = tmp_path / "c1.csv", tmp_path / "c2.csv"
    assert main(["census", str(prob), "--out", str(out1), "--csv", str(csv1)]) == 0
    assert main(["census", str(prob), "--out", str(out2), "--csv", str(csv2)]) == 0
    assert out1.read_bytes() == out2.read_bytes()
    assert csv1.read_bytes() == csv2.read_bytes()


def test_schema_error_exit_code(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({"n": 3, "d": 2, "potential": {"type": "newtonian"}}))
    assert main(["census", str(bad)]) == 1
    assert "schema error" in capsys.readouterr().err


def test_invalid_json_exit_code(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    assert main(["census", str(bad)]) == 1


def test_find_cc_with_seed_configuration(tmp_path, capsys):
    a = 1.0 / np.sqrt(2.0)
    prob = write_problem(
        tmp_path / "p.json",
        n=2,
        masses=[1.0, 1.0],
        seed_configuration=[[a, 0.0], [-a, 0.0]],
    )
    assert main(["find-cc", str(prob)]) == 0
    report = json.loads(capsys.readouterr().out)
    assert report["record"]["u_value"] == pytest.approx(a, rel=1e-12)
    assert report["lift_rotation_is_identity"] is True


def test_index_degenerate_exit_code(tmp_path, capsys):
    a = 1.0 / np.sqrt(2.0)
    prob = write_problem(
        tmp_path / "p.json",
        d=3,
        seed_configuration=[[-a, 0.0, 0.0], [0.0, 0.0, 0.0], [a, 0.0, 0.0]],
    )
    assert main(["index", str(prob)]) == 3
    report = json.loads(capsys.readouterr().out)
    assert report["failure"].startswith("degenerate record:")
    assert "isotropy" in report["failure"]
    assert report["records"][0]["index"]["refused"]


def test_index_census_mode(tmp_path, capsys):
    prob = write_problem(tmp_path / "p.json", solver={"rng_seed": 7, "n_starts": 40})
    assert main(["index", str(prob)]) == 0
    report = json.loads(capsys.readouterr().out)
    for entry in report["records"]:
        idx = entry["index"]
        assert idx["fixed_point_index"] == (-1) ** idx["morse_index"]


def test_verify_identity_subcommand(tmp_path, capsys):
    prob = write_problem(tmp_path / "p.json", solver={"rng_seed": 7, "n_starts": 30})
    assert main(["verify-identity", str(prob)]) == 0
    report = json.loads(capsys.readouterr().out)
    assert report["worst_residual"] <= 1e-8


def test_find_re_subcommand(tmp_path, capsys):
    q0 = [[0.8, 0.0, 0.0], [-0.8, 0.0, 0.0], [0.0, 0.6, 0.0], [0.0, -0.6, 0.0], [0.0, 0.0, 0.3], [0.0, 0.0, -0.3]]
    prob = write_problem(
        tmp_path / "p.json",
        n=6,
        d=3,
        masses=[1.0] * 6,
        potential={"type": "charged", "gamma": [20.0, 20.0, -2.0, -2.0, -2.0, -2.0]},
        cylinder={"c": 2.0},
        seed_configuration=q0,
    )
    assert main(["find-re", str(prob)]) == 0
    report = json.loads(capsys.readouterr().out)
    assert report["record"]["planar"] is False
    assert report["record"]["central"] is False
    assert report["record"]["u_value"] > 0


def test_find_re_requires_3d(tmp_path, capsys):
    prob = write_problem(tmp_path / "p.json")
    assert main(["find-re", str(prob)]) == 1


def test_example_subcommand(tmp_path, capsys):
    out = tmp_path / "cert.json"
    assert main(["example", "--c1", "20", "--c2", "-2", "--c3", "-2", "--out", str(out)]) == 0
    report = json.loads(out.read_text())
    cert = report["certificate"]
    assert all(cert[k] for k in ("criticality", "nonplanar", "noncentral", "positive_potential"))
    assert report["gates"] == [True, True, True]


def test_example_gate_failure(tmp_path, capsys):
    assert main(["example", "--c1", "1", "--c2", "-2", "--c3", "-2"]) == 3


def test_property_check_subcommand(tmp_path, capsys):
    prob = write_problem(tmp_path / "p.json", d=3)
    assert main(["property-check", str(prob), "--samples", "100"]) == 0
    report = json.loads(capsys.readouterr().out)
    assert report["violations"] == 0
    assert report["max_gradient_pairing"] <= 1e-12


def test_dynamics_subcommand(tmp_path, capsys):
    a = 1.0 / np.sqrt(2.0)
    prob = write_problem(
        tmp_path / "p.json",
        n=2,
        masses=[1.0, 1.0],
        seed_configuration=[[a, 0.0], [-a, 0.0]],
    )
    code = main(["dynamics", str(prob), "--steps", "4000", "--max-drift", "1e-6"])
    assert code == 0
    report = json.loads(capsys.readouterr().out)
    assert report["drift"] <= 1e-6


def test_figures_rendered(tmp_path, capsys):
    prob = write_problem(tmp_path / "p.json", solver={"rng_seed": 7, "n_starts": 30})
    figdir = tmp_path / "figs"
    assert main(["census", str(prob), "--out", str(tmp_path / "r.json"), "--figures", str(figdir)]) == 0
    pngs = sorted(p.name for p in figdir.glob("*.png"))
    assert len(pngs) == 5
    assert pngs[0] == "class_00.png"


def test_example_figures(tmp_path):
    figdir = tmp_path / "figs"
    out = tmp_path / "cert.json"
    assert (
        main(
            ["example", "--c1", "20", "--c2", "-2", "--c3", "-2", "--out", str(out), "--figures", str(figdir)]
        )
        == 0
    )
    names = {p.name for p in figdir.glob("*.png")}
    assert names == {"configuration.png", "strip_potential.png"}


def test_console_script_version():
    proc = subprocess.run(
        [sys.executable, "-m", "nbodycc.cli", "--version"], capture_output=True, text=True
    )
    assert proc.returncode == 0
    assert "nbodycc" in proc.stdout
