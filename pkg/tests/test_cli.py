import json
import math

import numpy as np
import pytest

from parking_garage.cli import main
from parking_garage.mesh import read_obj


@pytest.fixture
def workdir(tmp_path, monkeypatch, two_point_path):
    monkeypatch.chdir(tmp_path)
    (tmp_path / "two_point.json").write_text(two_point_path.read_text())
    return tmp_path


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_verify(workdir, capsys):
    code, out, _ = run(capsys, "verify", "--input", "two_point.json", "--k", "2")
    rep = json.loads(out)
    assert code == 0
    assert rep["residual"] <= 1e-12 and rep["total_charge"] == -2
    assert rep["surface_class"] == "scherk_type" and rep["jacobian_rank"] == 3
    assert rep["genus"]["quotient_genus_sigma"] == 1


def test_dihedral_karcher_scherk(workdir, capsys):
    code, out, _ = run(capsys, "dihedral", "--family", "karcher-scherk", "--k", "4")
    assert code == 0
    assert abs(json.loads(out)["p11"] - math.sqrt(1.5)) <= 1e-15
    lifted = json.loads((workdir / "karcher_scherk_k4_lifted.json").read_text())
    assert len(lifted["points"]) == 4
    assert json.loads((workdir / "karcher_scherk_k4_reduced.json").read_text())["k"] == 4


def test_dihedral_parameter_error(workdir, capsys):
    code, _, err = run(capsys, "dihedral", "--family", "fischer-koch", "--k", "3", "--origin-charge", "1")
    assert code == 2 and "k >= 4" in err


def test_solve_input(workdir, capsys):
    (workdir / "guess.json").write_text(json.dumps({"points": [[0.7, 0.0], [-0.7, 0.0]], "charges": [-1, -1]}))
    code, _, _ = run(capsys, "solve", "--input", "guess.json", "--out", "solved.json")
    data = json.loads((workdir / "solved.json").read_text())
    assert code == 0 and data["residual"] <= 1e-12
    assert abs(data["points"][0][0] - 1 / math.sqrt(2)) <= 1e-12


def test_solve_nonconvergence_exit_code(workdir, capsys):
    (workdir / "guess.json").write_text(json.dumps({"points": [[2.0, 0.0], [-1.1, 0.2], [0.0, 0.3]], "charges": [1, 1, -1]}))
    code, _, _ = run(capsys, "solve", "--input", "guess.json", "--max-iter", "1")
    assert code == 1


def test_random_search_seed_env(workdir, capsys, monkeypatch):
    run(capsys, "solve", "--charges", "-1,-1,-1", "--trials", "20", "--output", "a.json")
    monkeypatch.setenv("GARAGE_SEED", "20240601")
    run(capsys, "solve", "--charges", "-1,-1,-1", "--trials", "20", "--output", "b.json")
    monkeypatch.setenv("GARAGE_SEED", "5")
    run(capsys, "solve", "--charges", "-1,-1,-1", "--trials", "20", "--output", "c.json")
    assert (workdir / "a.json").read_bytes() == (workdir / "b.json").read_bytes()
    assert (workdir / "a.json").read_bytes() != (workdir / "c.json").read_bytes()


def test_mesh_output_deterministic(workdir, capsys):
    args = ["mesh", "--input", "two_point.json", "--sheets", "2", "--neck-radius", "0.1",
            "--radial-resolution", "2", "--angular-resolution", "32"]
    code, out, _ = run(capsys, *args, "--out", "m0.obj", "--csv", "m0.csv")
    run(capsys, *args, "--out", "m1.obj")
    assert code == 0
    assert (workdir / "m0.obj").read_bytes() == (workdir / "m1.obj").read_bytes()
    v, f, groups = read_obj(workdir / "m0.obj")
    info = json.loads(out)
    assert v.shape[0] == info["vertices"] and f.shape[0] == info["triangles"]
    assert groups == ["multigraph_f", "multigraph_f_plus_pi", "neck_1", "neck_2"]
    assert (workdir / "m0.csv").read_text().startswith("x,y,sheet,height\n")


def test_vortex_outputs(workdir, capsys):
    code, out, _ = run(capsys, "vortex", "--input", "two_point.json", "--dt", "0.01", "--out", "traj.csv")
    diag = json.loads((workdir / "traj.json").read_text())
    assert code == 0 and diag == json.loads(out)
    assert diag["rigid"] and abs(abs(diag["omega_estimate"]) - 1 / (2 * math.pi)) <= 1e-6
    data = np.loadtxt(workdir / "traj.csv", delimiter=",", skiprows=1)
    assert data.shape[1] == 5


def test_vortex_circulations_flag(workdir, capsys):
    code, out, _ = run(capsys, "vortex", "--input", "two_point.json", "--dt", "0.01",
                       "--steps", "500", "--circulations", "1,1")
    assert code == 0 and json.loads(out)["omega_estimate"] > 0


def test_identities(capsys):
    code, out, _ = run(capsys, "identities")
    data = json.loads(out)
    assert code == 0 and max(data["max_deviation_first"], data["max_deviation_second"]) <= 1e-12


@pytest.mark.parametrize(
    "argv,needle",
    [
        (["verify", "--input", "two_point.json", "--bogus"], "--bogus"),
        (["verify", "--input", "missing.json"], "missing.json"),
        (["verify", "--input", "broken.json"], "malformed JSON"),
        (["verify", "--input", "nocharges.json"], "charges"),
        (["solve", "--charges", "-1,x"], "--charges"),
        (["mesh", "--input", "two_point.json", "--neck-radius", "-1"], "neck_radius"),
        (["frobnicate"], "frobnicate"),
    ],
)
def test_errors_exit_two(workdir, capsys, argv, needle):
    (workdir / "broken.json").write_text("{not json")
    (workdir / "nocharges.json").write_text(json.dumps({"points": [[0, 0]]}))
    code, _, err = run(capsys, *argv)
    assert code == 2
    assert needle in err


def test_solve_options_file(workdir, capsys):
    (workdir / "opts.json").write_text(json.dumps({"tolerance": 1e-10, "bogus": 3}))
    code, _, err = run(capsys, "solve", "--input", "two_point.json", "--options", "opts.json")
    assert code == 2 and "bogus" in err
