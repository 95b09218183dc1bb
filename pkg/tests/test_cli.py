import csv
import io
import json
import math
import subprocess
import sys

import pytest
from click.testing import CliRunner

from frac_lab.cli import main


@pytest.fixture
def runner():
    return CliRunner()


def run(runner, *args, env=None):
    return runner.invoke(main, [str(a) for a in args], env=env)


def rows(text):
    return list(csv.DictReader(io.StringIO(text)))


class TestConstants:
    def test_line(self, runner):
        res = run(runner, "constants", "--n", 1, "--p", 2)
        assert res.exit_code == 0
        obj = json.loads(res.output)
        assert obj["gamma"] == pytest.approx(2 * math.pi**2, abs=1e-9)
        assert obj["alpha_star"] == pytest.approx(2 * math.pi**2, rel=1e-11)
        assert obj["omega"] == 2.0
        assert obj["tail_bound"] < 1e-12
        assert {"K", "terms_used", "n", "s", "p"} <= set(obj)

    def test_divergent_pair(self, runner):
        res = run(runner, "constants", "--n", 2, "--p", 2)
        assert res.exit_code == 2
        assert "p must exceed n" in res.output

    def test_invalid_p(self, runner):
        res = run(runner, "constants", "--p", 0.5)
        assert res.exit_code == 2
        assert "p must be > 1" in res.output

    def test_critical_relation_reported(self, runner):
        res = run(runner, "constants", "--n", 1, "--p", 2, "--s", 0.3)
        assert res.exit_code == 2
        assert "s*p = n" in res.output

    def test_series_failure_exit_3(self, runner):
        res = run(runner, "constants", "--n", 1, "--p", 1.01, "--tol", 1e-15)
        assert res.exit_code == 3


class TestMoser:
    def test_header_and_trend(self, runner):
        res = run(runner, "moser", "--n", 1, "--p", 2, "--eps-grid", "1e-1,1e-2,1e-4")
        assert res.exit_code == 0
        assert res.output.splitlines()[0] == "eps,seminorm_p,lp_norm_p,ratio"
        data = rows(res.output)
        gaps = [abs(float(r["ratio"]) - 1) for r in data]
        assert gaps[0] > gaps[1] > gaps[2]
        scaled = [float(r["lp_norm_p"]) * math.log(1 / float(r["eps"])) for r in data]
        assert max(scaled) < 2 * min(scaled)

    def test_bad_grid(self, runner):
        assert run(runner, "moser", "--p", 2, "--eps-grid", "a,b").exit_code == 2


class TestFiles:
    def test_seminorm_function(self, runner, tmp_path):
        path = tmp_path / "u.csv"
        path.write_text("x,value\n-1,0\n0,1\n1,0\n")
        res = run(runner, "seminorm", "--input", path, "--p", 2)
        assert res.exit_code == 0
        assert json.loads(res.output)["seminorm_p"] > 0

    def test_seminorm_profile(self, runner, tmp_path):
        path = tmp_path / "u.csv"
        path.write_text("r,value\n0,1\n0.5,0.5\n1,0\n")
        res = run(runner, "seminorm", "--input", path, "--n", 2, "--p", 4, "--rel-err", 1)
        assert res.exit_code == 0, res.output

    def test_rearrange(self, runner, tmp_path):
        path = tmp_path / "u.csv"
        path.write_text("x,value\n0,0\n1,2\n2,0\n5,0\n6,1\n7,0\n")
        res = run(runner, "rearrange", "--input", path)
        assert res.exit_code == 0
        assert res.output.splitlines()[0] == "r,value"

    def test_missing_file(self, runner, tmp_path):
        res = run(runner, "seminorm", "--input", tmp_path / "nope.csv", "--p", 2)
        assert res.exit_code == 4

    def test_bad_csv(self, runner, tmp_path):
        path = tmp_path / "u.csv"
        path.write_text("a,b\n0,0\n")
        assert run(runner, "seminorm", "--input", path, "--p", 2).exit_code == 2

    def test_output_file(self, runner, tmp_path):
        out = tmp_path / "c.json"
        res = run(runner, "constants", "--p", 2, "-o", out)
        assert res.exit_code == 0 and res.output == ""
        assert json.loads(out.read_text())["n"] == 1


class TestPoincare:
    def test_unit_interval(self, runner, tmp_path):
        dom = tmp_path / "unit.json"
        dom.write_text(json.dumps({"type": "intervals", "intervals": [[0, 1]]}))
        res = run(runner, "poincare", "--domain", dom)
        assert res.exit_code == 0
        obj = json.loads(res.output)
        assert obj["value"] > 0 and obj["lower_bound"] <= obj["value"]
        assert obj["flags"] == []

    def test_deterministic(self, runner, tmp_path):
        dom = tmp_path / "two.json"
        dom.write_text(json.dumps({"type": "intervals", "intervals": [[0, 1], [2, 3]]}))
        a = run(runner, "poincare", "--domain", dom, "--q", 3, "--seed", 4).output
        b = run(runner, "poincare", "--domain", dom, "--q", 3, "--seed", 4).output
        assert a == b

    def test_wrong_domain_type(self, runner, tmp_path):
        dom = tmp_path / "s.json"
        dom.write_text(json.dumps({"type": "strips", "intervals": [[0, 1]]}))
        assert run(runner, "poincare", "--domain", dom).exit_code == 2

    def test_ls_check(self, runner, tmp_path):
        dom = tmp_path / "s.json"
        dom.write_text(json.dumps({"type": "strips", "intervals": [[0, 1], [2, 3], [4, 5]], "axis": 0}))
        res = run(runner, "ls-check", "--domain", dom)
        assert res.exit_code == 0, res.output
        assert json.loads(res.output)["value"] > 0

    def test_threads_env(self, runner, tmp_path):
        dom = tmp_path / "unit.json"
        dom.write_text(json.dumps({"type": "intervals", "intervals": [[0, 1]]}))
        a = run(runner, "poincare", "--domain", dom, env={"FRAC_LAB_THREADS": "2"})
        b = run(runner, "poincare", "--domain", dom, env={"FRAC_LAB_THREADS": "1"})
        assert a.exit_code == 0 and a.output == b.output
        assert run(runner, "poincare", "--domain", dom, env={"FRAC_LAB_THREADS": "x"}).exit_code == 2


class TestScans:
    def test_blowup_increasing(self, runner):
        res = run(runner, "blowup", "--alpha-frac", 1.0, "--weight", "t", "--eps-grid", "1e-1,1e-2,1e-3")
        assert res.exit_code == 0
        data = rows(res.output)
        vals = [float(r["value"]) for r in data]
        assert vals[0] < vals[1] < vals[2]
        assert list(data[0])[:5] == ["eps", "seminorm_p", "lp_norm_p", "value", "inner_ball"]

    def test_fa_scan(self, runner):
        res = run(runner, "fa-scan", "--alpha-frac", 0.5, "--eps-grid", "1e-1,1e-2")
        assert res.exit_code == 0
        assert len(rows(res.output)) == 2

    def test_blowup_rejects(self, runner):
        assert run(runner, "blowup", "--alpha-frac", 2.0).exit_code == 2


def test_verify_quick(runner, tmp_path):
    out = tmp_path / "r.txt"
    res = run(runner, "verify", "--suite", "quick", "--seed", 0, "-o", out)
    assert res.exit_code == 0
    text = out.read_text()
    assert "checks passed" in text and "FAIL" not in text


def test_entry_point():
    res = subprocess.run([sys.executable, "-m", "frac_lab.cli", "constants", "--p", "2"], capture_output=True, text=True)
    assert res.returncode == 0
    assert json.loads(res.stdout)["gamma"] == pytest.approx(2 * math.pi**2)
