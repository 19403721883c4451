import csv
import io
import json

import numpy as np
import pytest

from hulc import simlab
from hulc.cli import main
from test_splitmath import FIG1


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def write_csv(path, header, rows):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        w.writerows(rows)
    return str(path)


class TestBtable:
    def test_default_table(self, capsys):
        code, out, _ = run(capsys, "btable", "--format", "csv")
        assert code == 0
        rows = list(csv.reader(io.StringIO(out)))
        assert rows[0] == ["delta", "alpha=0.15", "alpha=0.1", "alpha=0.05"]
        got = {float(r[0]): tuple(int(v) for v in r[1:]) for r in rows[1:]}
        assert got == FIG1

    def test_single_cell_and_inf(self, capsys):
        _, out, _ = run(capsys, "btable", "--alpha", "0.05", "--delta", "0,0.5", "--format", "csv")
        assert out.splitlines()[1:] == ["0,6", "0.5,INF"]

    def test_text(self, capsys):
        code, out, _ = run(capsys, "btable")
        assert code == 0 and len(out.splitlines()) == 10

    def test_bad_alpha(self, capsys):
        code, _, err = run(capsys, "btable", "--alpha", "1.5")
        assert code == 2 and "alpha" in err


class TestCi:
    def test_zeros(self, tmp_path, capsys):
        path = write_csv(tmp_path / "z.csv", ["x"], [[0.0]] * 600)
        code, out, _ = run(capsys, "ci", path, "--estimator", "mean", "--seed", "1")
        rec = json.loads(out)
        assert code == 0 and rec["lo"] == [0.0] and rec["hi"] == [0.0]
        assert set(rec) >= {"method", "alpha", "delta", "b_star", "lo", "hi", "seed"}

    def test_small_regression_fallback(self, tmp_path, capsys):
        data = simlab.gen_multireg(20, np.random.default_rng(0))
        path = write_csv(tmp_path / "m.csv", data.columns, data.values.tolist())
        code, out, err = run(capsys, "ci", path, "--estimator", "ols:1", "--seed", "3")
        assert code == 0, err
        rec = json.loads(out)
        assert rec["lo"][0] <= rec["hi"][0]

    def test_adaptive_auto(self, tmp_path, capsys):
        x = np.random.default_rng(1).normal(size=1000)
        path = write_csv(tmp_path / "g.csv", ["x"], [[v] for v in x])
        code, out, _ = run(capsys, "ci", path, "--method", "adaptive", "--subsample-size", "auto",
                           "--subsamples", "100", "--seed", "2")
        rec = json.loads(out)
        assert code == 0 and rec["subsample_size"] == 100

    def test_unimodal(self, tmp_path, capsys):
        x = np.random.default_rng(1).uniform(size=300)
        path = write_csv(tmp_path / "u.csv", ["x"], [[v] for v in x])
        code, out, _ = run(capsys, "ci", path, "--estimator", "max", "--method", "unimodal", "--seed", "2")
        rec = json.loads(out)
        assert code == 0 and rec["t"] == 0.5 and rec["delta"] == 0.5

    def test_seed_printed_and_env(self, tmp_path, capsys, monkeypatch):
        path = write_csv(tmp_path / "a.csv", ["x"], [[float(i)] for i in range(30)])
        monkeypatch.delenv("HULC_SEED", raising=False)
        _, out, err = run(capsys, "ci", path)
        assert "seed:" in err and json.loads(out)["seed"] == int(err.split("seed:")[1].split()[0])
        monkeypatch.setenv("HULC_SEED", "41")
        _, out, _ = run(capsys, "ci", path)
        assert json.loads(out)["seed"] == 41

    def test_infeasible(self, tmp_path, capsys):
        path = write_csv(tmp_path / "s.csv", ["x"], [[1.0], [2.0], [3.0]])
        code, out, err = run(capsys, "ci", path, "--estimator", "uniform-endpoint", "--seed", "0")
        rec = json.loads(err)
        assert code == 1 and out == ""
        assert rec["error"] == "infeasible" and rec["n"] == 3 and rec["b_star"] >= 5

    def test_missing_file_and_bad_estimator(self, tmp_path, capsys):
        code, _, err = run(capsys, "ci", str(tmp_path / "none.csv"), "--seed", "0")
        assert code == 1 and json.loads(err)["error"] == "input"
        path = write_csv(tmp_path / "a.csv", ["x"], [[1.0], [2.0]])
        code, _, err = run(capsys, "ci", path, "--estimator", "mode", "--seed", "0")
        assert code == 2 and "mean" in json.loads(err)["message"]

    def test_parse_error(self, tmp_path, capsys):
        path = tmp_path / "bad.csv"
        path.write_text("x\n1\nabc\n")
        code, _, err = run(capsys, "ci", str(path), "--seed", "0")
        assert code == 1 and "bad.csv:3" in json.loads(err)["message"]


class TestSimulate:
    ARGS = ("simulate", "--scenario", "lm-gamma", "--gamma", "0", "--n", "100", "--reps", "50", "--seed", "1")

    def test_byte_identical(self, tmp_path, capsys):
        a, b = tmp_path / "a.csv", tmp_path / "b.csv"
        assert run(capsys, *self.ARGS, "--out", str(a))[0] == 0
        assert run(capsys, *self.ARGS, "--out", str(b), "--workers", "2")[0] == 0
        assert a.read_bytes() == b.read_bytes()
        rows = list(csv.DictReader(io.StringIO(a.read_text())))
        assert list(rows[0]) == list(simlab.REPORT_COLUMNS)
        assert rows[0]["reps"] == "50" and rows[0]["method"] == "hulc"

    def test_unknown_scenario(self, capsys):
        code, _, err = run(capsys, "simulate", "--scenario", "fig99", "--n", "10", "--seed", "1")
        assert code == 2
        for name in simlab.SCENARIOS:
            assert name in err


class TestBand:
    def test_fig4(self, tmp_path, capsys):
        data = simlab.gen_monotone(1000, "fig4", np.random.default_rng(5))
        path = write_csv(tmp_path / "xy.csv", data.columns, data.values.tolist())
        out = tmp_path / "band.csv"
        code, _, err = run(capsys, "band", "--input", path, "--points", "25", "--alpha", "0.05",
                           "--method", "adaptive", "--subsamples", "200", "--seed", "3",
                           "--out", str(out))
        assert code == 0, err
        rows = list(csv.DictReader(io.StringIO(out.read_text())))
        assert len(rows) == 25 and list(rows[0]) == ["x", "lower", "upper"]
        assert all(float(r["lower"]) <= float(r["upper"]) for r in rows)


def test_module_entry_point():
    import subprocess
    import sys

    res = subprocess.run([sys.executable, "-m", "hulc", "btable", "--alpha", "0.05", "--delta", "0.4",
                          "--format", "csv"], capture_output=True, text=True, check=True)
    assert res.stdout.splitlines()[1] == "0.4,29"
