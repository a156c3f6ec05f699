import json
import subprocess
import sys
from pathlib import Path

import pytest

from qrlab.cli import main


def run_cli(argv, capsys):
    code = main(argv)
    out = capsys.readouterr()
    return code, out.out, out.err


class TestDelta:
    def test_upper_branch_value(self, capsys):
        code, out, _ = run_cli(["delta", "--n", "3", "--k", "2", "--p", "4"], capsys)
        assert code == 0 and "= 1/2" in out

    def test_log_case_annotated(self, capsys):
        code, out, _ = run_cli(["delta", "--n", "3", "--k", "1", "--p", "2"], capsys)
        assert code == 0 and "1/2" in out and "log^{1/2}(1/h)" in out

    def test_sweep_polyline(self, capsys, tmp_path):
        out_file = tmp_path / "sweep.dat"
        code, out, _ = run_cli(["delta", "--n", "2", "--k", "1", "--sweep",
                                "--out", str(out_file)], capsys)
        assert code == 0
        rows = [tuple(map(float, line.split()))
                for line in out_file.read_text().splitlines()]
        # breakpoint of the two branches at 1/p = 1/4 with delta = 1/4
        assert (0.25, 0.25) in rows
        invp = [r[0] for r in rows]
        assert invp == sorted(invp)
        # piecewise-linear: slopes change exactly once, at the breakpoint
        assert rows[0] == (0.0, 0.5) and rows[-1] == (0.5, 0.25)

    def test_sweep_with_full_manifold_column(self, capsys, tmp_path):
        out_file = tmp_path / "sweep.dat"
        code, _, _ = run_cli(["delta", "--n", "3", "--k", "2", "--sweep",
                              "--compare-full", "--out", str(out_file)], capsys)
        assert code == 0
        first = out_file.read_text().splitlines()[0].split()
        assert len(first) == 3
        assert float(first[1]) == 1.0 and float(first[2]) == 1.0  # both (n-1)/2 at p=inf

    def test_domain_error_exit(self, capsys):
        code, _, err = run_cli(["delta", "--n", "3", "--k", "5", "--p", "4"], capsys)
        assert code == 1 and "hint" in err


class TestPairs:
    def test_diagonal(self, capsys):
        code, out, _ = run_cli(["pairs", "--n", "3", "--k", "2"], capsys)
        assert code == 0 and "(3, 3)" in out and "1/3" in out

    def test_no_diagonal(self, capsys):
        code, out, _ = run_cli(["pairs", "--n", "6", "--k", "1"], capsys)
        assert code == 0 and "no diagonal pair" in out

    def test_raw_classical(self, capsys):
        code, out, _ = run_cli(["pairs", "--sigma-inf", "1", "--sigma-2", "0",
                                "--mu-inf", "1", "--p", "6"], capsys)
        assert code == 0 and "r = 3" in out


class TestRun:
    def make_config(self, tmp_path, **overrides):
        cfg = {
            "family": "zonal", "target": "great_circle",
            "ps": [6], "degrees": [16, 32, 64, 128, 256, 512],
            "tolerance": 0.05, "theory": {"n": 2, "k": 1},
        }
        cfg.update(overrides)
        path = tmp_path / "exp.json"
        path.write_text(json.dumps(cfg))
        return path

    def test_pass_suite_exit_zero(self, capsys, tmp_path):
        cfg = self.make_config(tmp_path)
        code, out, _ = run_cli(["run", str(cfg), "--out-dir", str(tmp_path / "res")], capsys)
        assert code == 0, out
        out_dirs = list((tmp_path / "res").iterdir())
        assert len(out_dirs) == 1
        names = {f.name for f in out_dirs[0].iterdir()}
        assert {"table.csv", "table.jsonl", "verdicts.json", "manifest.json"} <= names
        # identical content in both encodings
        csv_rows = out_dirs[0].joinpath("table.csv").read_text().strip().splitlines()[1:]
        jsonl = [json.loads(l) for l in
                 out_dirs[0].joinpath("table.jsonl").read_text().strip().splitlines()]
        assert len(csv_rows) == len(jsonl)
        for line, rec in zip(csv_rows, jsonl):
            assert line == f"{rec['degree']},{rec['h']},{rec['p']},{rec['norm']}"
        manifest = json.loads(out_dirs[0].joinpath("manifest.json").read_text())
        assert manifest["outputs"] == ["table.csv", "table.jsonl", "verdicts.json"]

    def test_failing_theory_exit_two(self, capsys, tmp_path):
        # compare the zonal p=6 run against a wrong target: n=4 theory
        cfg = self.make_config(tmp_path, theory={"n": 4, "k": 1})
        code, *_ = run_cli(["run", str(cfg), "--out-dir", str(tmp_path / "res")], capsys)
        assert code == 2

    def test_malformed_config_exit_one(self, capsys, tmp_path):
        path = tmp_path / "bad.json"
        path.write_text("{not json")
        code, _, err = run_cli(["run", str(path)], capsys)
        assert code == 1 and "config error" in err

    def test_bad_field_named(self, capsys, tmp_path):
        cfg = self.make_config(tmp_path, family="nope")
        code, _, err = run_cli(["run", str(cfg)], capsys)
        assert code == 1 and "family" in err

    def test_dry_run_writes_nothing(self, capsys, tmp_path):
        cfg = self.make_config(tmp_path)
        code, out, _ = run_cli(["run", str(cfg), "--dry-run",
                                "--out-dir", str(tmp_path / "res")], capsys)
        assert code == 0 and "rung" in out
        assert not (tmp_path / "res").exists()

    def test_env_var_root(self, capsys, tmp_path, monkeypatch):
        monkeypatch.setenv("QRLAB_RESULTS", str(tmp_path / "env_root"))
        cfg = self.make_config(tmp_path)
        code, *_ = run_cli(["run", str(cfg)], capsys)
        assert code == 0
        assert (tmp_path / "env_root").exists()


class TestKernel:
    def test_free_point_sweep(self, capsys, tmp_path):
        cfg = tmp_path / "kernel.json"
        cfg.write_text(json.dumps({
            "symbol": "free", "dim": 1,
            "hs": [2 ** -5, 2 ** -6, 2 ** -7],
            "taus": {"min_over_h": 16, "max": 0.5, "count": 5},
            "grid_points": 2048, "restriction": "point",
        }))
        code, out, _ = run_cli(["kernel", str(cfg)], capsys)
        assert code == 0
        for line in out.splitlines():
            if line.startswith("sup:"):
                mu = float(line.split("mu = ")[1].split(",")[0])
                sigma = float(line.split("sigma = ")[1].split(",")[0])
                assert abs(mu - 0.5) < 0.1 and abs(sigma - 0.5) < 0.1
                break
        else:
            pytest.fail("no sup fit line printed")

    def test_collinear_taus_refused(self, capsys, tmp_path):
        cfg = tmp_path / "kernel.json"
        cfg.write_text(json.dumps({
            "symbol": "free", "dim": 1,
            "hs": [2 ** -5, 2 ** -6, 2 ** -7],
            "taus": [0.0], "grid_points": 512, "restriction": "point",
        }))
        code, _, err = run_cli(["kernel", str(cfg)], capsys)
        assert code == 1 and "collinear" in err.lower()


class TestFactor:
    def test_sphere_report(self, capsys):
        code, out, _ = run_cli(["factor", "--symbol", "sphere", "--x", "0,0",
                                "--xi", "1,0", "--axis", "0"], capsys)
        assert code == 0
        assert "positive_definite" in out and "a(x0, xi'0) = 1" in out

    def test_degenerate_verbatim(self, capsys):
        code, _, err = run_cli(["factor", "--symbol", "degenerate", "--x", "0,0",
                                "--xi", "0.3,0", "--axis", "1"], capsys)
        assert code == 1 and "(A1)" in err


class TestInstalledEntryPoint:
    def test_console_script(self):
        proc = subprocess.run([sys.executable, "-m", "qrlab.cli", "delta",
                               "--n", "2", "--k", "1", "--p", "4"],
                              capture_output=True, text=True)
        assert proc.returncode == 0 and "1/4" in proc.stdout
