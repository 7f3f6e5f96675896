import json
import subprocess
import sys

import pytest

from apollo.census import GEOMETRIC, count_orbit
from apollo.cli import ValidationError, main, parse_args, parse_root


def run(tmp_path, *argv, name="out"):
    out = tmp_path / name
    code = main([*argv, f"--out={out}"])
    return code, out


def test_parse_examples():
    a = parse_args(["count", "--root=-1,2,2,3", "--tmax=1e6", "--mode=augmented", "--out=counts.csv"])
    assert a.command == "count" and float(a.tmax) == 1e6 and a.mode == "augmented"
    a = parse_args(["spectral", "--n=3", "--delta=1.30568", "--s1=1.2", "--ell-max=50"])
    assert (a.n, a.delta, a.s1, a.ell_max) == (3, 1.30568, 1.2, 50)
    with pytest.raises(ValidationError, match=r"root fails Descartes form \(Q = -40\)"):
        parse_args(["count", "--root=1,2,3,4"])
    assert parse_root("0,0,1,1") == (0, 0, 1, 1)


def test_exit_codes(tmp_path, capsys):
    assert main(["count", "--root=1,2,3,4", "--tmax=10"]) == 3
    assert "Descartes form" in capsys.readouterr().err
    assert main(["count", "--root=-1,2,2"]) == 3
    assert main(["nonsense"]) == 2
    assert main(["count", "--tmax=10"]) == 2
    assert main(["gen", "--root=-1,2,2,3", "--max-curv=1e5", "--budget=100"]) == 4
    assert main(["gen", "--root=-1,2,2,3", "--max-curv=10", f"--out={tmp_path}/missing/dir/x.csv"]) == 5
    assert main(["render", f"--in={tmp_path}/absent.csv"]) == 5
    assert main(["count", "--root=-1,2,2,3", "--grid=100,10"]) == 3
    assert main(["count", "--root=-1,2,2,3", "--tmax=10"]) == 0


def test_gen_csv_and_check(tmp_path):
    code, out = run(tmp_path, "gen", "--root=-1,2,2,3", "--max-curv=10", "--check")
    assert code == 0
    lines = out.read_text().splitlines()
    assert lines[0] == "curvature,center_x,center_y,radius,depth"
    assert len(lines) - 1 == count_orbit((-1, 2, 2, 3), 10, GEOMETRIC)
    meta = json.loads((tmp_path / "out.meta.json").read_text())
    assert {"command", "seed", "version", "warnings"} <= meta.keys()


@pytest.mark.parametrize("root", ["-1,2,2,3", "0,0,1,1"])
def test_render_round_trip(tmp_path, root):
    code, csv_path = run(tmp_path, "gen", f"--root={root}", "--max-curv=100", name="c.csv")
    assert code == 0
    assert run(tmp_path, "render", f"--in={csv_path}", name="a.svg")[0] == 0
    assert run(tmp_path, "render", f"--root={root}", "--max-curv=100", name="b.svg")[0] == 0
    a, b = (tmp_path / "a.svg").read_bytes(), (tmp_path / "b.svg").read_bytes()
    assert a == b
    n_rows = len(csv_path.read_text().splitlines()) - 1
    text = a.decode()
    if root == "0,0,1,1":
        assert text.count("<rect") == 3  # clip window plus two lines
        assert text.count("<circle") == n_rows - 2
    else:
        assert text.count("<circle") == n_rows


@pytest.mark.parametrize(
    "argv",
    [
        ["gen", "--root=-1,2,2,3", "--max-curv=2000"],
        ["gen", "--root=0,0,1,1", "--max-curv=500"],
        ["count", "--root=-1,2,2,3", "--tmax=1e5", "--per-decade=6"],
        ["count", "--root=-11,21,24,28", "--tmax=1e4", "--norm=euclidean", "--engine=exact"],
        ["sieve", "--root=-1,2,2,3", "--tmax=1000", "--R=1,2,inf"],
        ["boxdim", "--root=-1,2,2,3", "--cutoff=300", "--eps-exp=2:5"],
    ],
)
def test_threads_do_not_change_output(tmp_path, argv):
    _, a = run(tmp_path, *argv, "--threads=1", name="one")
    _, b = run(tmp_path, *argv, "--threads=8", name="eight")
    assert a.read_bytes() == b.read_bytes()


def test_fit_report(tmp_path):
    _, counts = run(tmp_path, "count", "--root=-1,2,2,3", "--tmin=100", "--tmax=1e5", name="counts.csv")
    code, rep = run(tmp_path, "fit", f"--counts={counts}", name="fit.json")
    assert code == 0
    data = json.loads(rep.read_text())
    assert {"c", "alpha", "residual", "window", "mode", "norm", "root"} <= data.keys()
    assert 1.25 < data["alpha"] < 1.36
    assert data["root"] == [-1, 2, 2, 3]


def test_sieve_header(tmp_path):
    _, out = run(tmp_path, "sieve", "--root=-1,2,2,3", "--grid=100,1000")
    assert out.read_text().splitlines()[0] == "T,R,i,count,normalized"


def test_vector_mode_warning(tmp_path):
    run(tmp_path, "count", "--root=-1,2,2,3", "--tmax=100", "--mode=vector", name="v.csv")
    meta = json.loads((tmp_path / "v.csv.meta.json").read_text())
    assert meta["warnings"]


def test_spectral_report(tmp_path):
    code, out = run(tmp_path, "spectral", "--n=3", "--delta=1.30568", "--s1=1.2", "--ell-max=50", name="s.json")
    assert code == 0
    rep = json.loads(out.read_text())
    checks = rep["checks"]
    assert checks["legendre_max_abs"] <= 1 + 1e-12
    assert checks["M_theta_identity_2_residual"] < 1e-8
    assert rep["values"]["horospherical_error_exponent"] == pytest.approx(0.69432 + 2 * 0.10568 / 7)


def test_rerun_byte_identical(tmp_path):
    argv = ["spectral", "--n=2", "--delta=0.8", "--s1=0.7", "--s0=0.05"]
    _, a = run(tmp_path, *argv, name="a")
    _, b = run(tmp_path, *argv, name="b")
    assert a.read_bytes() == b.read_bytes()


def test_module_entry_point():
    res = subprocess.run(
        [sys.executable, "-m", "apollo", "count", "--root=-1,2,2,3", "--grid=4,10", "--mode=geometric"],
        capture_output=True,
        text=True,
    )
    assert res.returncode == 0
    assert res.stdout.splitlines() == ["T,N", "4,5", "10,9"]
