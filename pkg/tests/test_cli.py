import json
import math

import pytest

from trapspec.cli import main
from trapspec.eigensolver import Spectrum, exact_rectangle_spectrum


@pytest.fixture()
def square_json(tmp_path):
    p = tmp_path / "square.json"
    p.write_text(json.dumps({"a": 1.0, "c": 1.0}))
    return str(p)


@pytest.fixture()
def trap_json(tmp_path):
    p = tmp_path / "trap.json"
    p.write_text(
        json.dumps(
            {"B": 2.0, "h": 1.2, "alpha": math.pi / 3, "beta": math.pi / 3}
        )
    )
    return str(p)


@pytest.fixture()
def square_spectrum_csv(tmp_path):
    p = tmp_path / "square.csv"
    p.write_text(exact_rectangle_spectrum(1, 1, 2000).to_csv())
    return str(p)


class TestSpectrumCommand:
    def test_exact_rectangle(self, square_json, tmp_path):
        out = tmp_path / "spec.csv"
        rc = main(["spectrum", square_json, "--exact", "--n", "50", "--out", str(out)])
        assert rc == 0
        s = Spectrum.from_csv(out.read_text())
        assert s.count == 50
        assert s.eigenvalues[0] == pytest.approx(2 * math.pi**2, rel=1e-12)
        assert "# config=" in out.read_text()

    def test_deterministic(self, square_json, tmp_path):
        a, b = tmp_path / "a.csv", tmp_path / "b.csv"
        main(["spectrum", square_json, "--exact", "--n", "30", "--out", str(a)])
        main(["spectrum", square_json, "--exact", "--n", "30", "--out", str(b)])
        assert a.read_text() == b.read_text()

    def test_missing_file_exits_1(self, tmp_path, capsys):
        rc = main(["spectrum", str(tmp_path / "nope.json")])
        assert rc == 1
        err = json.loads(capsys.readouterr().err)
        assert "error" in err

    def test_usage_error_exits_2(self):
        with pytest.raises(SystemExit) as exc:
            main(["spectrum"])  # missing domain argument
        assert exc.value.code == 2


class TestInvariantsCommand:
    def test_square(self, square_spectrum_csv, tmp_path, capsys):
        rc = main(["invariants", square_spectrum_csv])
        assert rc == 0
        d = json.loads(capsys.readouterr().out)
        assert d["invariants"]["area"] == pytest.approx(1.0, rel=0.01)
        assert d["invariants"]["perimeter"] == pytest.approx(4.0, rel=0.02)
        assert "config" in d


class TestOrbitsCommand:
    def test_trapezoid_contains_2h_and_2b(self, trap_json, tmp_path, capsys):
        rc = main(["orbits", trap_json, "--lmax", "6", "--period-max", "10"])
        assert rc == 0
        lines = [
            json.loads(s)
            for s in capsys.readouterr().out.splitlines()
            if s and not s.startswith("#")
        ]
        lengths = [e["length"] for e in lines]
        two_b = 2 * (2.0 - 1.2 * 2 / math.sqrt(3))  # top side of this trapezoid
        assert any(abs(x - 2.4) < 1e-9 for x in lengths)  # 2h
        assert any(abs(x - two_b) < 1e-9 for x in lengths)

    def test_svg_output(self, trap_json, tmp_path):
        svg = tmp_path / "orbits.svg"
        rc = main(
            ["orbits", trap_json, "--lmax", "3", "--period-max", "8",
             "--out", str(tmp_path / "o.json"), "--svg", str(svg)]
        )
        assert rc == 0
        assert svg.read_text().startswith("<svg")


class TestWavetraceCommand:
    def test_square_candidates(self, square_spectrum_csv, tmp_path):
        out = tmp_path / "cands.json"
        rc = main(
            ["wavetrace", square_spectrum_csv, "--t-lo", "1.5", "--t-hi", "3.5",
             "--out", str(out)]
        )
        assert rc == 0
        d = json.loads(out.read_text())
        t0s = sorted(c["t0"] for c in d["candidates"])
        assert abs(t0s[0] - 2.0) < 0.05
        assert abs(t0s[-1] - 2 * math.sqrt(2)) < 0.05

    def test_probe_csv(self, square_spectrum_csv, tmp_path):
        probe_out = tmp_path / "probe.csv"
        rc = main(
            ["wavetrace", square_spectrum_csv, "--t-lo", "1.5", "--t-hi", "2.5",
             "--probe-t0", "2.0", "--probe-out", str(probe_out),
             "--out", str(tmp_path / "c.json")]
        )
        assert rc == 0
        assert "k,absI,argI" in probe_out.read_text()


class TestReconstructCommand:
    def test_square(self, square_spectrum_csv, tmp_path):
        out = tmp_path / "report.json"
        rc = main(["reconstruct", square_spectrum_csv, "--out", str(out)])
        assert rc == 0
        d = json.loads(out.read_text())
        assert d["branch"] == "Rectangle"
        assert d["shape"]["a"] == pytest.approx(1.0, abs=0.02)


class TestCompareCommand:
    def test_identical(self, trap_json, capsys):
        rc = main(["compare", trap_json, trap_json])
        assert rc == 0
        d = json.loads(capsys.readouterr().out)
        assert d["verdict"] == "congruent"

    def test_distinct(self, trap_json, tmp_path, capsys):
        other = tmp_path / "other.json"
        other.write_text(
            json.dumps({"B": 2.0, "h": 1.0, "alpha": 1.3, "beta": 1.0})
        )
        rc = main(["compare", trap_json, str(other)])
        assert rc == 0
        d = json.loads(capsys.readouterr().out)
        assert d["verdict"] == "distinct-invariants"


class TestPropsCommand:
    def test_gutkin_passes(self, tmp_path, capsys):
        rc = main(["props", "gutkin", "--n", "5", "--seed", "7"])
        assert rc == 0
        d = json.loads(capsys.readouterr().out)
        assert d["failures"] == []

    def test_unknown_suite_is_usage_error(self):
        with pytest.raises(SystemExit) as exc:
            main(["props", "no-such-suite"])
        assert exc.value.code == 2
