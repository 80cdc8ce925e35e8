import csv
import io
import json
import math
import subprocess
import sys

import numpy as np
import pytest
from scipy.signal import lfilter

from specgeo import FrequencyGrid
from specgeo.cli import main
from specgeo.speech import AudioSignal, read_wav, write_wav


def _write(path, obj):
    path.write_text(json.dumps(obj))
    return str(path)


@pytest.fixture
def files(tmp_path):
    return {
        "a": _write(tmp_path / "a.json", {"num": [0, 4, 0], "den": [-2, 5, -2]}),
        "a3": _write(tmp_path / "a3.json", {"num": [0, 12, 0], "den": [-2, 5, -2]}),
        "b": _write(tmp_path / "b.json", {"num": [0, 9, 0], "den": [3, 10, 3]}),
        "ratio": _write(tmp_path / "ratio.json", {"num": [1, 1 / 3], "den": [1, -0.5]}),
        "unstable": _write(tmp_path / "u.json", {"num": [1], "den": [1, -1.5]}),
        "flat": _write(tmp_path / "flat.json", {"a": [[0.0]], "b": [[0.0]], "c": [[0.0]], "d": [[1.0]]}),
        "vanish": _write(tmp_path / "v.json", {"a": [[0.0]], "b": [[1.0]], "c": [[1.0]], "d": [[1.0]]}),
        "indef": _write(tmp_path / "i.json", {"num": [1, 2, 1], "den": [1]}),
        "bad": _write(tmp_path / "bad.json", {"x": 1}),
    }


def _run(capsys, *argv):
    code = main([str(a) for a in argv])
    out = capsys.readouterr()
    return code, out.out, out.err


def _write_csv(path, grid, values):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["theta", "value"])
        for th, v in zip(grid.theta, values):
            w.writerow([repr(float(th)), repr(float(v))])
    return str(path)


class TestDistance:
    def test_worked_pair(self, capsys, files):
        code, out, _ = _run(capsys, "distance", "--metric", "thompson", files["a"], files["b"])
        assert code == 0
        d = json.loads(out)
        assert d["value"] == pytest.approx(math.log(64 / 9), rel=1e-8)
        assert d["M12"] == pytest.approx(64 / 9, rel=1e-8)
        assert d["M21"] == pytest.approx(81 / 16, rel=1e-8)

    def test_scaled_copy(self, capsys, files):
        code, out, _ = _run(capsys, "distance", "--metric", "hilbert", files["a"], files["a3"])
        assert code == 0 and json.loads(out)["value"] == pytest.approx(0.0, abs=1e-10)

    @pytest.mark.parametrize("metric", ["riemannian", "frobenius"])
    def test_other_metrics(self, capsys, files, metric):
        code, out, _ = _run(capsys, "distance", "--metric", metric, files["a"], files["b"])
        assert code == 0 and json.loads(out)["value"] > 0

    def test_grid_path(self, capsys, files):
        code, out, _ = _run(capsys, "distance", "--path", "grid", "--grid", "1024", files["a"], files["b"])
        d = json.loads(out)
        assert code == 0 and d["path"] == "grid" and d["diagnostics"]["grid"] == 1024

    def test_sampled_input(self, capsys, tmp_path):
        g = FrequencyGrid(512)
        one = _write_csv(tmp_path / "one.csv", g, np.ones(g.N))
        ten = _write_csv(tmp_path / "ten.csv", g, np.where(np.abs(g.theta) <= 0.1, 10.0, 1.0))
        code, out, _ = _run(capsys, "distance", one, ten)
        assert code == 0 and json.loads(out)["value"] == pytest.approx(math.log(10))

    def test_infinite(self, capsys, files):
        code, out, _ = _run(capsys, "distance", files["flat"], files["vanish"])
        assert code == 2 and json.loads(out)["value"] == "inf"

    def test_out_file(self, capsys, files, tmp_path):
        target = tmp_path / "d.json"
        code, out, _ = _run(capsys, "distance", "--out", target, files["a"], files["b"])
        assert code == 0 and out == ""
        assert json.loads(target.read_text())["M21"] == pytest.approx(81 / 16, rel=1e-8)


class TestExitCodes:
    def test_not_positive(self, capsys, files):
        code, _, err = _run(capsys, "distance", files["a"], files["indef"])
        assert code == 3 and "invalid input" in err

    def test_malformed_file(self, capsys, files):
        assert _run(capsys, "distance", files["a"], files["bad"])[0] == 3

    def test_missing_file(self, capsys, files, tmp_path):
        assert _run(capsys, "distance", files["a"], tmp_path / "none.json")[0] == 3

    def test_usage_error(self, capsys, files):
        assert _run(capsys, "distance", "--metric", "euclid", files["a"], files["b"])[0] == 3

    def test_bad_tau(self, capsys, files):
        assert _run(capsys, "geodesic", "--tau", "0,inf", files["a"], files["b"])[0] == 3

    def test_numerical_failure(self, capsys, files):
        code, _, err = _run(capsys, "norm", files["unstable"])
        assert code == 4 and "numerical failure" in err

    def test_csv_not_on_grid(self, capsys, files, tmp_path):
        path = tmp_path / "off.csv"
        path.write_text("theta,value\n0.0,1.0\n0.5,1.0\n")
        assert _run(capsys, "distance", path, path)[0] == 3


class TestNorm:
    def test_hinf(self, capsys, files):
        code, out, _ = _run(capsys, "norm", "--kind", "hinf", files["ratio"])
        d = json.loads(out)
        assert code == 0 and d["value"] == pytest.approx(8 / 3, rel=1e-7)
        lo, hi = d["certified_interval"]
        assert lo <= 8 / 3 <= hi

    def test_h2(self, capsys, files):
        code, out, _ = _run(capsys, "norm", "--kind", "h2", files["ratio"])
        assert code == 0 and json.loads(out)["value_squared"] == pytest.approx(52 / 27, rel=1e-12)

    def test_grid(self, capsys, files):
        code, out, _ = _run(capsys, "norm", "--kind", "linf-grid", "--grid", "256", files["ratio"])
        assert code == 0 and json.loads(out)["value"] == pytest.approx(8 / 3, rel=1e-12)


class TestFactorize:
    def test_worked_factor(self, capsys, files):
        code, out, _ = _run(capsys, "factorize", files["a"])
        d = json.loads(out)
        assert code == 0 and d["minimum_phase"] is True
        assert np.allclose(d["tf"]["den"], [1.0, -0.5])

    def test_round_trip(self, capsys, files, tmp_path):
        fac = tmp_path / "fa.json"
        for name in ("a", "b"):
            assert _run(capsys, "factorize", "--out", fac, files[name])[0] == 0
            code, out, _ = _run(capsys, "distance", files[name], fac)
            assert code == 0 and json.loads(out)["value"] < 1e-6

    def test_rejects_sampled(self, capsys, tmp_path):
        g = FrequencyGrid(16)
        path = _write_csv(tmp_path / "one.csv", g, np.ones(g.N))
        assert _run(capsys, "factorize", path)[0] == 3


class TestGeodesic:
    def test_json(self, capsys, files):
        code, out, _ = _run(capsys, "geodesic", "--tau", "0,0.5,1", files["a"], files["b"])
        d = json.loads(out)
        assert code == 0 and [p["tau"] for p in d["points"]] == [0.0, 0.5, 1.0]
        tf = d["points"][0]["factor"]["tf"]
        z = np.exp(1j * np.linspace(-3, 3, 7))
        w = np.polyval(tf["num"][::-1], 1 / z) / np.polyval(tf["den"][::-1], 1 / z)
        assert np.allclose(np.abs(w) ** 2, 4 / np.real(5 - 2 * z - 2 / z), rtol=1e-8)

    @pytest.mark.parametrize("kind", ["finsler", "riemannian"])
    def test_csv_columns(self, capsys, files, kind):
        code, out, _ = _run(capsys, "geodesic", "--kind", kind, "--tau", "0.25,0.75", "--grid", "64",
                            "--out-format", "csv", files["a"], files["b"])
        rows = list(csv.reader(io.StringIO(out)))
        assert code == 0 and rows[0] == ["tau", "theta", "value"]
        assert len(rows) == 1 + 2 * 64
        assert all(len(r) == len(rows[0]) for r in rows)

    def test_matrix_csv_columns(self, capsys, tmp_path):
        W = {"a": [[0.5, 0.0], [0.1, -0.3]], "b": [[1.0, 0.0], [0.0, 1.0]],
             "c": [[1.0, 0.2], [0.0, 1.0]], "d": [[1.0, 0.0], [0.3, 1.0]]}
        V = {"a": [[0.2]], "b": [[1.0, 0.5]], "c": [[1.0], [0.0]], "d": [[2.0, 0.0], [0.0, 1.0]]}
        p1, p2 = _write(tmp_path / "w.json", W), _write(tmp_path / "v.json", V)
        code, out, _ = _run(capsys, "geodesic", "--tau", "1.5", "--grid", "32", "--out-format", "csv", p1, p2)
        rows = list(csv.reader(io.StringIO(out)))
        assert code == 0
        assert rows[0] == ["tau", "theta", "re_1_1", "im_1_1", "re_1_2", "im_1_2",
                           "re_2_1", "im_2_1", "re_2_2", "im_2_2"]
        assert all(len(r) == 10 for r in rows) and len(rows) == 33

    def test_hilbert_needs_normalized(self, capsys, files):
        assert _run(capsys, "geodesic", "--kind", "hilbert", "--tau", "0.5", files["a"], files["b"])[0] == 3


class TestMorph:
    @staticmethod
    def _vowel(path, a, f0, seed):
        e = np.zeros(4800)
        e[:: int(round(16000 / f0))] = 1.0
        e += 0.01 * np.random.default_rng(seed).standard_normal(e.size)
        x = lfilter([1.0], a, e)
        write_wav(path, AudioSignal(0.3 * x / np.max(np.abs(x)), 16000))
        return str(path)

    def test_morph(self, capsys, tmp_path):
        a = self._vowel(tmp_path / "a.wav", [1.0, -1.3, 0.8], 120, 1)
        b = self._vowel(tmp_path / "b.wav", [1.0, 0.4, 0.7], 200, 2)
        cfg = tmp_path / "m.cfg"
        cfg.write_text("pitch_mode = geometric\n")
        out = tmp_path / "m.wav"
        code, _, _ = _run(capsys, "morph", "--tau", "0.5", "--seed", "3", "--config", cfg, "--out", out, a, b)
        assert code == 0
        y = read_wav(out)
        assert y.sample_rate == 16000 and len(y) == 28 * 160

    def test_morph_needs_out(self, capsys, tmp_path):
        a = self._vowel(tmp_path / "a.wav", [1.0, -0.5], 120, 1)
        assert _run(capsys, "morph", a, a)[0] == 3


def test_module_entry_point(tmp_path):
    a = _write(tmp_path / "a.json", {"num": [0, 4, 0], "den": [-2, 5, -2]})
    b = _write(tmp_path / "b.json", {"num": [0, 9, 0], "den": [3, 10, 3]})
    proc = subprocess.run([sys.executable, "-m", "specgeo", "distance", a, b], capture_output=True, text=True)
    assert proc.returncode == 0
    assert json.loads(proc.stdout)["value"] == pytest.approx(math.log(64 / 9), rel=1e-8)
