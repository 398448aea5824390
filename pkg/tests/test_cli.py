import csv
import json

import numpy as np
import pytest

from scgmatch import stepsize
from scgmatch.cli import improvement_summary, main, operator_distances
from scgmatch.graph import AttributedGraph, save_graph
from scgmatch.synth import plant_permutation, random_geometric_graph


@pytest.fixture
def planted_files(tmp_path):
    g = random_geometric_graph(8, 4, "full")
    h, truth = plant_permutation(g, 11)
    save_graph(g, tmp_path / "g1.json")
    save_graph(h, tmp_path / "g2.json")
    (tmp_path / "truth.json").write_text(json.dumps({"pairs": [list(p) for p in truth.pairs]}))
    return tmp_path


def read_csv(path):
    with open(path, newline="") as f:
        return list(csv.DictReader(f))


class TestMatch:
    def test_planted_accuracy(self, planted_files):
        d = planted_files
        out = d / "res.json"
        code = main(["match", "--a", str(d / "g1.json"), "--b", str(d / "g2.json"), "--algo", "scg",
                     "--gamma", "5", "--truth", str(d / "truth.json"), "--out", str(out)])
        assert code == 0
        res = json.loads(out.read_text())
        assert res["accuracy"] == 1.0
        assert res["matching_error"] == pytest.approx(0.0, abs=1e-12)
        assert {"pairs", "objective", "iterations", "alpha_trace", "wall_time"} <= set(res)
        manifest = json.loads((d / "res.json.manifest.json").read_text())
        assert manifest["run_id"] == res["manifest"] and manifest["command"] == "match"

    def test_stdout(self, planted_files, capsys):
        d = planted_files
        assert main(["match", "--a", str(d / "g1.json"), "--b", str(d / "g2.json"), "--algo", "dspfp"]) == 0
        assert len(json.loads(capsys.readouterr().out)["pairs"]) == 8

    def test_invalid_gamma(self, planted_files, capsys):
        d = planted_files
        code = main(["match", "--a", str(d / "g1.json"), "--b", str(d / "g2.json"), "--gamma", "0"])
        assert code == 1
        assert "gamma" in capsys.readouterr().err

    def test_missing_file(self, tmp_path, capsys):
        assert main(["match", "--a", str(tmp_path / "missing.json"), "--b", str(tmp_path / "x.json")]) == 1
        assert capsys.readouterr().err

    def test_bad_alpha(self, planted_files):
        d = planted_files
        assert main(["match", "--a", str(d / "g1.json"), "--b", str(d / "g2.json"), "--alpha", "big"]) == 1

    def test_solver_error(self, tmp_path, capsys):
        save_graph(AttributedGraph(np.zeros((3, 3)), features=-np.ones((3, 1))), tmp_path / "a.json")
        save_graph(AttributedGraph(np.zeros((3, 3)), features=np.ones((3, 1))), tmp_path / "b.json")
        code = main(["match", "--a", str(tmp_path / "a.json"), "--b", str(tmp_path / "b.json"), "--algo", "sm"])
        assert code == 2
        assert "solver error" in capsys.readouterr().err


class TestBenchOperators:
    def test_csv(self, tmp_path):
        out = tmp_path / "ops.csv"
        assert main(["bench-operators", "--phi", "1,10,100", "--iters", "50", "--out", str(out)]) == 0
        rows = read_csv(out)
        assert list(rows[0]) == ["phi", "operator", "iter", "distance", "seed"]
        assert len(rows) == 3 * 2 * 50
        assert (tmp_path / "ops.csv.manifest.json").exists()

        def series(phi, op):
            return [float(r["distance"]) for r in rows if float(r["phi"]) == phi and r["operator"] == op]

        np.testing.assert_allclose(series(1, "dynamic-softassign"), series(10, "dynamic-softassign"),
                                   rtol=0, atol=1e-12)
        assert series(100, "alternating-projection")[-1] > series(1, "alternating-projection")[-1]

    def test_alternating_plateau_at_unit_magnitude(self):
        d = operator_distances(1.0, 0, n=50, iters=50)["alternating-projection"]
        assert abs(d[-1] - d[-2]) < 1e-6
        assert d[-1] <= d[0]

    def test_invalid(self):
        assert main(["bench-operators", "--phi", "0"]) == 1
        assert main(["bench-operators", "--phi", "x"]) == 1


class TestBenchNoise:
    ARGS = ["bench-noise", "--sizes", "20", "--deletions", "0,5", "--trials", "2", "--algos", "scg,aipfp"]

    def test_csv_and_summary(self, tmp_path, capsys):
        out = tmp_path / "noise.csv"
        assert main(self.ARGS + ["--out", str(out)]) == 0
        rows = read_csv(out)
        assert list(rows[0]) == ["algo", "alpha_mode", "n", "q", "seed", "time", "matching_error", "accuracy"]
        assert len(rows) == 2 * 2 * 2 * 2
        keys = [(r["algo"], r["alpha_mode"], int(r["n"]), int(r["q"]), int(r["seed"])) for r in rows]
        assert keys == sorted(keys)
        summary = capsys.readouterr().out
        assert "SCG" in summary and "AIPFP" in summary and "Accuracy" in summary
        assert (tmp_path / "noise.csv.manifest.json").exists()

    def test_deterministic_and_parallel(self, tmp_path, monkeypatch):
        metric = ["algo", "alpha_mode", "n", "q", "seed", "matching_error", "accuracy"]

        def run(name):
            main(self.ARGS + ["--out", str(tmp_path / name)])
            return [[r[c] for c in metric] for r in read_csv(tmp_path / name)]

        first = run("a.csv")
        assert run("b.csv") == first
        monkeypatch.setenv("GM_THREADS", "2")
        assert run("c.csv") == first

    def test_zero_trials(self):
        assert main(["bench-noise", "--trials", "0"]) == 1

    def test_unknown_algo(self):
        assert main(["bench-noise", "--trials", "1", "--algos", "ipfp"]) == 1

    def test_improvement_signs(self):
        rows = [("SCG", "fixed", 10, 1, 0, 2.0, 0.5, 0.8), ("SCG", "adaptive", 10, 1, 0, 1.0, 0.25, 0.88)]
        imp = improvement_summary(rows)["SCG"]
        assert imp["time"] == pytest.approx(50.0)
        assert imp["matching_error"] == pytest.approx(50.0)
        assert imp["accuracy"] == pytest.approx(10.0)


class TestSelftest:
    def test_all_pass(self, capsys):
        assert main(["selftest"]) == 0
        out = capsys.readouterr().out
        assert "FAIL" not in out and out.count("PASS") == 7

    def test_filter(self, capsys):
        assert main(["selftest", "--filter", "eigen"]) == 0
        lines = capsys.readouterr().out.strip().splitlines()
        assert len(lines) == 1 and lines[0].startswith("eigen")

    def test_unknown_filter(self):
        assert main(["selftest", "--filter", "nope"]) == 1

    def test_sign_flip_detected(self, monkeypatch, capsys):
        real = stepsize.quadratic_coefficients

        def flipped(*args, **kwargs):
            a, b = real(*args, **kwargs)
            return -a, b

        monkeypatch.setattr(stepsize, "quadratic_coefficients", flipped)
        assert main(["selftest", "--filter", "ascent"]) == 3
        assert "FAIL" in capsys.readouterr().out


def test_no_command():
    assert main([]) == 1
