from __future__ import annotations

import json
import subprocess
import sys

import pytest

from qdiv.cli import main, parse_f
from qdiv.errors import DomainError


def run(capsys, *argv):
    code = main(list(argv))
    return code, capsys.readouterr().out


def test_verify_json_all_pass(capsys):
    code, out = run(capsys, "verify", "--order", "20", "--kmax", "3", "--mmax", "3", "--tmax", "3",
                    "--format", "json", "--jobs", "1")
    data = json.loads(out)
    assert code == 0
    assert data["verdict"] == "pass"
    assert all(r["verdict"] == "pass" and r["first_mismatch"] is None for r in data["reports"])


def test_verify_order_zero(capsys):
    code, out = run(capsys, "verify", "--order", "0", "--jobs", "1")
    assert code == 0
    assert "checks passed" in out


def test_verify_output_independent_of_jobs(capsys):
    args = ("verify", "--order", "10", "--kmax", "2", "--mmax", "2", "--tmax", "2", "--format", "csv")
    _, a = run(capsys, *args, "--jobs", "1")
    _, b = run(capsys, *args, "--jobs", "3")
    assert a == b


def test_jobs_env_fallback(capsys, monkeypatch):
    monkeypatch.setenv("QDIV_JOBS", "2")
    code, _ = run(capsys, "verify", "--order", "5", "--kmax", "1", "--mmax", "1", "--tmax", "1")
    assert code == 0


@pytest.mark.parametrize(
    "argv",
    [
        ["verify", "--order", "-1"],
        ["verify", "--format", "xml"],
        ["limits", "--f", "bogus"],
        ["limits", "--f", "0,0"],
        ["tables", "--what", "stirling"],
        ["tables", "--what", "K", "--params", "m"],
        ["nothing"],
    ],
)
def test_usage_errors_exit_2(argv, capsys):
    with pytest.raises(SystemExit) as exc:
        main(argv)
    assert exc.value.code == 2


def test_simulate_config_error_exits_2(capsys):
    assert main(["simulate", "--n", "3", "--p", "1.5"]) == 2


def test_limits_const1(capsys):
    code, out = run(capsys, "limits", "--f", "const1", "--order", "8", "--format", "csv")
    rows = out.strip().splitlines()[1:]
    assert code == 0
    assert [r.split(",")[1] for r in rows][1:] == ["1", "2", "2", "3", "2", "4", "2", "4"]


def test_limits_presets(capsys):
    _, a = run(capsys, "limits", "--f", "fk:0", "--order", "5", "--format", "json")
    _, b = run(capsys, "limits", "--f", "const1", "--order", "5", "--format", "json")
    assert json.loads(a)["limit"] == json.loads(b)["limit"]
    _, c = run(capsys, "limits", "--f", "dilcher:2", "--order", "6", "--format", "json")
    assert json.loads(c)["limit"]["coeffs"] == ["0", "0", "1", "3", "6", "9", "14"]
    _, d = run(capsys, "limits", "--f", "1,2/3", "--order", "3", "--format", "json")
    assert json.loads(d)["f_coeffs"] == ["1", "2/3"]


def test_parse_f():
    assert parse_f("const1").f.coeffs == (1,)
    assert parse_f("fk:2").f.coeffs == (-1, 2)
    with pytest.raises(DomainError):
        parse_f("dilcher:0")


def test_cumulants_rows(capsys):
    code, out = run(capsys, "cumulants", "--tmax", "5", "--order", "40", "--format", "json")
    data = json.loads(out)
    assert code == 0
    rows = data["rows"]
    assert [r["verdict"] for r in rows] == ["pass"] * 5
    assert rows[0]["K"]["coeffs"][:7] == ["0", "1", "2", "2", "3", "2", "4"]
    assert rows[1]["K"]["coeffs"][:5] == ["0", "1", "3", "4", "7"]
    assert [r["sign_X"] for r in rows] == [None, 1, -1, 1, -1]


def test_tables(capsys):
    _, out = run(capsys, "tables", "--what", "bernoulli", "--params", "jmax=6", "--format", "json")
    assert json.loads(out)["bernoulli"] == ["1", "-1/2", "1/6", "0", "-1/30", "0", "1/42"]
    _, out = run(capsys, "tables", "--what", "eulerian", "--params", "kmax=3", "--format", "json")
    assert json.loads(out)["eulerian"] == [["1"], ["1"], ["1", "1"], ["1", "4", "1"]]
    _, out = run(capsys, "tables", "--what", "pmf", "--params", "n=3", "--format", "json")
    assert json.loads(out)["pmf"] == [["0", "0", "1"], ["0", "1", "0", "-1"], ["1", "-1", "-1", "1"]]
    _, out = run(capsys, "tables", "--what", "K", "--params", "m=2,order=4", "--format", "text")
    assert out.split() == ["0:", "0", "1:", "1", "2:", "3", "3:", "4", "4:", "7"]


def test_simulate_small(capsys):
    code, out = run(capsys, "simulate", "--n", "1", "--p", "0.5", "--samples", "10", "--seed", "7", "--format", "json")
    data = json.loads(out)
    assert code == 0
    assert data["cumulants"]["estimate"][:2] == [1.0, 0.0]


def test_simulate_byte_identical_subprocess():
    cmd = [sys.executable, "-m", "qdiv", "simulate", "--n", "8", "--p", "0.5", "--samples", "20000",
           "--seed", "42", "--format", "json", "--bootstrap", "100"]
    a = subprocess.run(cmd, capture_output=True, check=True).stdout
    b = subprocess.run(cmd + ["--jobs", "2"], capture_output=True, check=True).stdout
    assert a == b and a
