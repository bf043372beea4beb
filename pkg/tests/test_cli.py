import csv
import io
import json
import math
import subprocess
import sys

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fracstefan import cli
from fracstefan.cli import (
    EXIT_NO_ROOT,
    EXIT_OK,
    EXIT_USAGE,
    EXIT_VERIFY_FAILED,
    ConfigError,
    RunConfig,
    f2_scan,
    main,
    parse_alphas,
)
from fracstefan.special import WrightEvalConfig
from fracstefan.verify import CheckResult, ResidualReport


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def read_csv(text):
    return list(csv.DictReader(io.StringIO(text)))


class TestXi:
    def test_default(self, capsys):
        code, out, _ = run(capsys, "xi")
        assert code == EXIT_OK
        assert "root 0: xi = 1.0143521001" in out
        assert "smallest root" in out

    def test_classical_routing(self, capsys):
        code, out, _ = run(capsys, "xi", "--alpha", "1")
        assert code == EXIT_OK
        assert "mu = 0.5698928944" in out

    def test_no_root(self, capsys):
        code, _, err = run(capsys, "xi", "--scan-max", "0.2")
        assert code == EXIT_NO_ROOT
        assert "no sign change" in err


class TestProfile:
    def test_csv(self, capsys):
        code, out, _ = run(capsys, "profile")
        assert code == EXIT_OK
        assert out.splitlines()[0] == "x,t,phase,u"
        rows = read_csv(out)
        for t in ("0.5", "1", "2"):
            sub = [r for r in rows if r["t"] == t]
            assert float(sub[0]["x"]) == 0.0 and float(sub[0]["u"]) == 1.5
            u = [float(r["u"]) for r in sub]
            assert all(a > b for a, b in zip(u, u[1:]))
            assert sum(r["phase"] == "front" for r in sub) == 1

    def test_json_to_file(self, capsys, tmp_path):
        out_path = tmp_path / "p.json"
        code, out, _ = run(capsys, "profile", "--format", "json", "--out", str(out_path))
        assert code == EXIT_OK and out == ""
        rows = json.loads(out_path.read_text())
        assert {"x", "t", "phase", "u"} <= set(rows[0])

    def test_byte_identical_reruns(self, capsys):
        _, first, _ = run(capsys, "profile")
        _, second, _ = run(capsys, "profile")
        assert first == second


class TestF2Scan:
    def test_default_sets(self, capsys):
        code, out, err = run(capsys, "f2-scan")
        assert code == EXIT_OK
        rows = read_csv(out)
        assert out.splitlines()[0] == "alpha,x,F2"
        assert len(rows) == 9 * 500
        assert err.count(": yes") == 9

    def test_fraction_alphas(self, capsys):
        code, out, _ = run(capsys, "f2-scan", "--alphas", "1/16,3/8", "--n", "5")
        assert code == EXIT_OK
        assert {r["alpha"] for r in read_csv(out)} == {"0.0625", "0.375"}

    def test_function(self):
        rows, inc = f2_scan([0.5], 5.0, 10)
        assert inc == {0.5: True}
        assert rows[0]["F2"] == pytest.approx(1 / math.gamma(0.75), rel=1e-13)

    @pytest.mark.parametrize("argv", [["--alphas", "0,0.5"], ["--alphas", "x"], ["--n", "1"]])
    def test_bad_arguments(self, capsys, argv):
        assert run(capsys, "f2-scan", *argv)[0] == EXIT_USAGE


class TestVerify:
    def test_pass(self, capsys):
        code, out, _ = run(capsys, "verify", "--skip-limit")
        assert code == EXIT_OK
        assert "overall: PASS" in out

    def test_failure_exit_code(self, capsys, monkeypatch):
        bad = ResidualReport(1.0, 1.0, 1.0, {}, {}, [CheckResult("forced", 1.0, 0.0, False)])
        monkeypatch.setattr(cli, "run_verification", lambda sol, include_limit: bad)
        code, out, _ = run(capsys, "verify")
        assert code == EXIT_VERIFY_FAILED
        assert "FAIL" in out


class TestLimitSweep:
    def test_table(self, capsys):
        code, out, err = run(capsys, "limit-sweep")
        assert code == EXIT_OK
        rows = read_csv(out)
        assert [r["alpha"] for r in rows] == ["0.80000000000000004", "0.90000000000000002",
                                              "0.94999999999999996", "0.98999999999999999", "1"]
        assert float(rows[-1]["xi_alpha"]) == pytest.approx(1.13978578883, abs=1e-10)
        gaps = [float(r["xi_gap"]) for r in rows[:-1]]
        assert all(a > b for a, b in zip(gaps, gaps[1:]))
        assert "classical mu" in err

    def test_error_rows(self, capsys):
        code, out, err = run(capsys, "limit-sweep", "--alphas", "0.9", "--scan-max", "0.1")
        assert code == EXIT_OK
        assert read_csv(out)[0]["xi_alpha"] == "ERROR"
        assert "NoRootError" in err

    def test_unordered_alphas(self, capsys):
        assert run(capsys, "limit-sweep", "--alphas", "0.9,0.8")[0] == EXIT_USAGE


class TestConfig:
    def test_file(self, capsys, tmp_path):
        path = tmp_path / "c.json"
        path.write_text(json.dumps({"alpha": 0.5, "u0": 2.0, "n_x": 3, "times": [1.0]}))
        code, out, _ = run(capsys, "profile", "--config", str(path))
        assert code == EXIT_OK
        assert len(read_csv(out)) == 4  # three samples plus the front

    @pytest.mark.parametrize("data", [
        {"bogus": 1}, {"ui": 1.0}, {"tol": 0.1}, {"format": "xml"}, {"times": []},
        {"series_terms_max": 5}, {"k1": "abc"}, [1, 2],
    ])
    def test_rejected(self, data):
        with pytest.raises(ConfigError):
            RunConfig.from_dict(data)

    @pytest.mark.parametrize("content", ["{not json", None])
    def test_bad_files(self, capsys, tmp_path, content):
        path = tmp_path / "c.json"
        if content is not None:
            path.write_text(content)
        assert run(capsys, "xi", "--config", str(path))[0] == EXIT_USAGE

    @settings(max_examples=40, deadline=None)
    @given(alpha=st.floats(0.01, 1.0), u0=st.floats(0.01, 100), ui=st.floats(-100, -0.01),
           k1=st.floats(0.01, 100), tol=st.floats(1e-14, 1e-4), n_x=st.integers(2, 1000),
           crossover=st.floats(1.0, 20.0), fmt=st.sampled_from(["csv", "json"]))
    def test_round_trip(self, alpha, u0, ui, k1, tol, n_x, crossover, fmt):
        data = {"alpha": alpha, "u0": u0, "ui": ui, "k1": k1, "tol": tol, "n_x": n_x,
                "crossover_x": crossover, "format": fmt}
        cfg = RunConfig.from_dict(data)
        again = RunConfig.from_dict(json.loads(json.dumps(cfg.to_dict())))
        assert again == cfg
        assert again.eval == WrightEvalConfig(crossover_x=crossover)

    def test_bad_alpha_override(self, capsys):
        assert run(capsys, "xi", "--alpha", "1.5")[0] == EXIT_USAGE

    def test_parse_alphas(self):
        assert parse_alphas("1/16, 0.5,15/16") == [0.0625, 0.5, 0.9375]


def test_usage_errors(capsys):
    assert main([]) == EXIT_USAGE
    assert main(["nope"]) == EXIT_USAGE
    assert main(["--help"]) == EXIT_OK


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "fracstefan", "xi"], capture_output=True, text=True)
    assert proc.returncode == 0
    assert "xi = " in proc.stdout
