import json
import math
import subprocess
import sys

import pytest

from nonloc_mt import cli


def run_cli(*args):
    return cli.main([str(a) for a in args])


def test_compute_kdp(tmp_path, capsys):
    assert run_cli("compute", "--functional", "kdp", "--d", 2, "--p", 2, "--out", tmp_path) == 0
    rec = json.loads((tmp_path / "compute.json").read_text())
    assert rec["value"] == pytest.approx(math.pi, abs=1e-8)
    assert set(rec) >= {"value", "stderr", "method", "trace"}


def test_compute_linear(tmp_path):
    assert run_cli("compute", "--functional", "idelta", "--field", "linear", "--domain", "0,1",
                   "--p", 2, "--delta", 0.1, "--out", tmp_path) == 0
    rec = json.loads((tmp_path / "compute.json").read_text())
    assert rec["value"] == pytest.approx(0.81, abs=1e-9)
    # 17 significant digits in JSON
    assert '"value": 0.80999999999999' in (tmp_path / "compute.json").read_text()


def test_compute_indicator_height_delta(tmp_path):
    assert run_cli("compute", "--functional", "idelta", "--field", "indicator:height=delta",
                   "--out", tmp_path) == 0
    assert json.loads((tmp_path / "compute.json").read_text())["value"] == 0


def test_compute_bbm(tmp_path):
    assert run_cli("compute", "--functional", "bbm", "--field", "linear", "--domain", "0,1",
                   "--mollifier", "indicator:n=100", "--out", tmp_path) == 0


def test_config_file_and_override(tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("# sweep-free compute\nfunctional = idelta\nfield=linear\ndomain=0,1\ndelta=0.1\n")
    assert run_cli("compute", "--config", cfg, "--out", tmp_path) == 0
    assert json.loads((tmp_path / "compute.json").read_text())["value"] == pytest.approx(0.81)
    assert run_cli("compute", "--config", cfg, "--delta", 0.2, "--out", tmp_path) == 0
    assert json.loads((tmp_path / "compute.json").read_text())["value"] == pytest.approx(0.64)


@pytest.mark.parametrize("args", [
    ("compute", "--field", "nosuch"),
    ("compute", "--field", "linear", "--domain", "1,0"),
    ("compute", "--field", "linear", "--d", 2, "--domain", "0,1"),
    ("compute", "--config", "/nonexistent/cfg"),
    ("compute", "--bogus-flag"),
])
def test_config_errors_exit_2(tmp_path, args):
    assert run_cli(*args, "--out", tmp_path) == 2 if args[-1] != "--bogus-flag" else \
        run_cli(*args) == 2


def test_bad_config_key(tmp_path):
    cfg = tmp_path / "bad.cfg"
    cfg.write_text("colour=blue\n")
    assert run_cli("compute", "--config", cfg, "--out", tmp_path) == 2


def test_high_variance_exit_3(tmp_path):
    assert run_cli("compute", "--field", "tent:radius=1", "--d", 3, "--domain", "ball:1",
                   "--p", 3, "--delta", 0.02, "--method", "montecarlo", "--samples", 1024,
                   "--out", tmp_path) == 3


def test_verify_holds_exit_0(tmp_path):
    assert run_cli("verify", "bbm", "--field", "linear", "--p", 2, "--out", tmp_path) == 0
    data = json.loads((tmp_path / "bbm.json").read_text())
    assert data["status"] == "holds"
    assert abs(data["measured_constants"]["limit"] - 1.0) < 1e-3
    assert (tmp_path / "bbm.txt").read_text().startswith("statement:")


def test_verify_fails_exit_4(tmp_path):
    # the Moser decrease is not visible on this grid (see the decisions ledger)
    assert run_cli("verify", "moser", "--d", 1, "--q", 1.5, "--gamma", 2, "--alpha", 1,
                   "--n", "1000,10000,100000", "--out", tmp_path) == 4


def test_exit_code_mapping():
    assert cli._status_code("holds") == 0
    assert cli._status_code("fails") == 4
    assert cli._status_code("inconclusive") == 5


def test_sweep_delta_matches_closed_form_and_round_trips(tmp_path):
    assert run_cli("sweep", "--param", "delta", "--values", "0.5,0.2,0.1", "--field", "linear",
                   "--domain", "0,1", "--out", tmp_path, "--name", "lin") == 0
    rows = cli.read_csv(tmp_path / "lin.csv")
    for r in rows:
        assert r["value"] == pytest.approx((1 - r["param"]) ** 2, abs=1e-9)
    assert (tmp_path / "lin.csv").read_text().splitlines()[0] == "param,value,stderr,method"
    svg = (tmp_path / "lin.svg").read_bytes()
    assert b'viewBox="0 0 800 600"' in svg and b"<polyline" in svg
    out = tmp_path / "re"
    out.mkdir()
    assert run_cli("report", tmp_path / "lin.csv", "--out", out) == 0
    assert (out / "lin.svg").read_bytes() == svg


def test_sweep_tau_slope(tmp_path):
    assert run_cli("sweep", "--param", "tau", "--values", "0.5,0.25,0.125", "--field", "loglog:lam=3",
                   "--delta", 1, "--domain", "ball:0.36787944117144233", "--logx", "--logy",
                   "--out", tmp_path, "--name", "tau") == 0
    rows = cli.read_csv(tmp_path / "tau.csv")
    # I(u_tau, B_{1/e}) = tau^{p-d} I(u, B_{tau/e}); the second factor also shrinks with tau
    from nonloc_mt import Ball, LogLog, NonlocalParams, i_delta
    for r in rows:
        inner = i_delta(LogLog(3.0), Ball.centered(1, r["param"] * math.exp(-1.0)),
                        NonlocalParams(1, 2.0, 1.0)).value
        assert r["value"] == pytest.approx(r["param"] ** (2 - 1) * inner, rel=1e-8)
    slopes = [math.log(b["value"] / a["value"]) / math.log(b["param"] / a["param"])
              for a, b in zip(rows, rows[1:])]
    assert all(s >= 2 - 1 for s in slopes)
    svg = (tmp_path / "tau.svg").read_text()
    assert "log10(param)" in svg and "log10(value)" in svg


def test_sweep_lambda(tmp_path):
    assert run_cli("sweep", "--param", "lambda", "--values", "3,5,8", "--delta", 1,
                   "--domain", "ball:0.36787944117144233", "--out", tmp_path) == 0
    assert len(cli.read_csv(tmp_path / "sweep.csv")) == 3


def test_report_json(tmp_path):
    run_cli("verify", "loglog", "--out", tmp_path)
    assert run_cli("report", tmp_path / "loglog.json", "--out", tmp_path / "r") == 0
    text = (tmp_path / "r" / "loglog.txt").read_text()
    assert text == (tmp_path / "loglog.txt").read_text()


def test_parse_helpers():
    f = cli.parse_field("linear:gradient=1/2,offset=0.5", 2)
    assert f.gradient == (1.0, 2.0)
    assert cli.parse_field("indicator:height=delta", 1, delta=0.3).height == 0.3
    assert cli.parse_domain("box:0/0,1/2", 2).measure == pytest.approx(2.0)
    assert cli.parse_domain("ball:0.5/0.5,0.25", 2).radius == 0.25
    with pytest.raises(cli.ConfigError):
        cli.parse_field("indicator:height=delta", 1)


def test_console_script_entry_point(tmp_path):
    out = subprocess.run([sys.executable, "-m", "nonloc_mt.cli", "compute", "--functional", "kdp",
                          "--d", "3", "--p", "2", "--out", str(tmp_path)], capture_output=True, text=True)
    assert out.returncode == 0 and out.stderr == ""
    assert json.loads(out.stdout)["value"] == pytest.approx(4 * math.pi / 3)
