import io
import json

import pytest

from gl2dist import cli
from gl2dist.errors import QuadratureNotConverged
from gl2dist.expsum import hyper_kloosterman_direct


def call(*argv):
    out, err = io.StringIO(), io.StringIO()
    code = cli.run(list(argv), out, err)
    return code, out.getvalue(), err.getvalue()


def data_lines(text):
    return [ln for ln in text.splitlines() if not ln.startswith("#")]


def test_kl_single_value():
    code, out, _ = call("kl", "--k", "3", "--q", "105", "--n", "4")
    assert code == 0
    assert out.startswith("# gl2dist kl k=3 n=4 q=105\n")
    (line,) = data_lines(out)
    re_, im_ = map(float, line.split(","))
    ref = hyper_kloosterman_direct(3, 4, 105)
    assert abs(complex(re_, im_) - ref) < 1e-13


def test_kl_table_round_trip(tmp_path):
    from gl2dist.expsum import kl_table, read_kl_csv

    path = tmp_path / "kl.csv"
    code, out, _ = call("kl-table", "--k", "2", "--q", "30", "--out", str(path))
    assert code == 0 and out == ""
    k, back = read_kl_csv(path.read_text())
    assert k == 2
    assert abs(back.values - kl_table(2, 30).values).max() < 1e-14


def test_tau_and_conv():
    code, out, _ = call("tau", "--N", "5")
    assert code == 0
    rows = data_lines(out)
    assert rows[0] == "n,tau,lambda"
    assert [int(r.split(",")[1]) for r in rows[1:]] == [1, -24, 252, -1472, 4830]
    code, out, _ = call("conv", "--N", "4")
    assert code == 0 and data_lines(out)[0] == "n,lambda_conv"


def test_check_voronoi_json():
    code, out, _ = call("check", "--identity", "voronoi", "--q", "5", "--a", "2", "--M", "100", "--tol", "1e-3")
    assert code == 0
    reports = json.loads(out)
    (rep,) = reports
    assert rep["identity"] == "voronoi" and rep["q"] == 5 and rep["a"] == 2
    assert rep["rel_residual"] < 1e-3 and not rep["flagged"]
    assert rep["config"]["tol"] == 1e-3


def test_check_poisson_with_refine():
    code, out, _ = call("check", "--identity", "poisson_ap", "--q", "7", "--a", "3", "--M", "100",
                        "--tol", "1e-9", "--refine")
    assert code == 0
    rep = json.loads(out)[0]
    assert rep["rel_residual"] < 1e-8
    assert rep["refinement"]["monotone"]


def test_check_twisted_kernels():
    for kernel in ("one", "delta", "kl2"):
        code, out, _ = call("check", "--identity", "poisson_twisted", "--q", "7", "--a", "3",
                            "--M", "100", "--kernel", kernel, "--tol", "1e-9")
        assert code == 0, kernel
        assert json.loads(out)[0]["rel_residual"] < 1e-8


def test_exponent_map():
    code, out, _ = call("exponent", "--delta", "0.041666", "--eta", "0.001", "--kappa", "0.001",
                        "--step", "0.005")
    assert code == 0
    assert any(ln.startswith("# sup_best=") for ln in out.splitlines())
    rows = data_lines(out)
    assert rows[0] == "mu_p,nu_p,bound1,bound2,bound3,trivial,best,covering_case"
    assert len(rows) > 1000


def test_bilinear_and_scan():
    code, out, _ = call("bilinear", "--q", "101", "--a", "2", "--M", "10,20", "--L", "15")
    assert code == 0
    rows = data_lines(out)
    assert rows[0].startswith("q,a,M,L,observed,bound1,bound2,bound3")
    assert len(rows) == 3
    code, out, _ = call("scan", "--X", "20000", "--theta-min", "0.45", "--theta-max", "0.47")
    assert code == 0
    rows = data_lines(out)
    assert rows[0] == "X,q,a,theta,prog_sum,main_term,error_E,normalized"
    assert len(rows) == 1 + 3 * 5


def test_scan_single_modulus():
    code, out, _ = call("scan", "--X", "10000", "--q", "7", "--a", "3")
    assert code == 0
    (row,) = data_lines(out)[1:]
    assert row.split(",")[1:3] == ["7", "3"]


@pytest.mark.parametrize("argv", [
    ("scan", "--X", "20000", "--theta-min", "0.45", "--theta-max", "0.5", "--threads", "1"),
    ("exponent", "--delta", "0.05", "--step", "0.01"),
    ("check", "--identity", "poisson_ap", "--q", "30", "--a", "7", "--M", "100"),
])
def test_byte_identical_reruns(argv):
    first = call(*argv)
    second = call(*argv)
    assert first == second
    if argv[0] == "scan":
        threaded = call(*argv[:-1], "4")
        assert threaded[1] == first[1]


@pytest.mark.parametrize("argv,flag", [
    (("kl", "--k", "3", "--q", "12", "--n", "1"), "--q"),
    (("kl", "--k", "1", "--q", "7", "--n", "1"), "--k"),
    (("check", "--identity", "voronoi", "--q", "6", "--a", "3"), "--a"),
    (("check", "--identity", "nope", "--q", "7"), "--identity"),
    (("check", "--identity", "voronoi", "--q", "7", "--tol", "0.5"), "--tol"),
    (("scan", "--X", "1000", "--threads", "0"), "--threads"),
    (("kl", "--k", "3", "--q", "7", "--n", "1", "--bogus", "2"), "--bogus"),
    (("tau", "--N", "0"), "--N"),
])
def test_validation_errors_name_the_flag(argv, flag):
    code, out, err = call(*argv)
    assert code == 1
    assert out == ""
    assert flag in err


def test_missing_subcommand():
    code, _, err = call()
    assert code == 1 and "subcommand" in err


def test_help_exits_cleanly(capsys):
    assert cli.run(["--help"]) == 0


def test_non_convergence_exit_code(monkeypatch):
    def boom(*a, **k):
        raise QuadratureNotConverged("forced")

    monkeypatch.setattr(cli.ex, "verify_case_analysis", boom)
    code, out, err = call("exponent", "--delta", "0.05")
    assert code == 2 and "not converged" in err


def test_threads_environment_fallback(monkeypatch):
    monkeypatch.setenv("GL2DIST_THREADS", "3")
    assert cli._threads(None) == 3
    monkeypatch.setenv("GL2DIST_THREADS", "x")
    with pytest.raises(cli.UsageError):
        cli._threads(None)
