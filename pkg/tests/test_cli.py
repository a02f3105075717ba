import io
import json
import subprocess
import sys

import pytest

from qcorr.cli import fmt, run
from qcorr.correlations import MeasureResult
from qcorr.states import from_descriptor


def call(*argv):
    out, err = io.StringIO(), io.StringIO()
    code = run(list(argv), stdout=out, stderr=err)
    return code, out.getvalue(), err.getvalue()


class TestCompute:
    def test_werner_zero(self):
        code, out, _ = call("compute", "--state", '{"family":"werner","z":0}', "--measure", "discord")
        assert code == 0 and out == "0.0\n"

    def test_unphysical_exit_1(self):
        code, out, err = call("compute", "--state", '{"family":"bell_diagonal","c":[0.9,0.9,0.9]}', "--measure", "discord")
        assert code == 1 and out == ""
        assert "lambda5" in err and "-0.425" in err

    def test_both(self):
        code, out, _ = call("compute", "--bell", "0.3,-0.4,0.56", "--measure", "super-discord", "--x", "2.5",
                            "--method", "both")
        assert code == 0
        lines = dict(line.split() for line in out.strip().splitlines())
        assert float(lines["closed_form"]) == pytest.approx(0.132488422684, abs=1e-11)
        assert abs(float(lines["difference"])) <= 1e-9

    def test_twelve_digits(self):
        _, out, _ = call("compute", "--werner", "0.5", "--measure", "discord")
        assert out.strip() == "0.262483183764"

    def test_missing_x_is_usage_error(self):
        code, _, err = call("compute", "--werner", "0.5", "--measure", "weak-deficit")
        assert code == 2 and "--x" in err

    def test_conflicting_state_flags(self):
        code, _, _ = call("compute", "--werner", "0.5", "--bell", "0,0,0", "--measure", "discord")
        assert code == 2

    def test_bad_measure_choice(self, capsys):
        code, _, _ = call("compute", "--werner", "0.5", "--measure", "entanglement")
        assert code == 2

    def test_raw_state_numeric_default(self):
        desc = {"family": "raw", "matrix": [[0.25 if i in (0, 5, 10, 15) else 0.0, 0.0] for i in range(16)]}
        code, out, _ = call("compute", "--state", json.dumps(desc), "--measure", "deficit")
        assert code == 0 and float(out) == pytest.approx(0.0, abs=1e-9)
        code, _, _ = call("compute", "--state", json.dumps(desc), "--measure", "deficit", "--method", "closed")
        assert code == 1

    def test_fixed_basis(self):
        code, out, _ = call("compute", "--werner", "0.5", "--measure", "discord", "--basis", "0.6,0,0.8")
        assert code == 0 and float(out) == pytest.approx(0.262483183764, abs=1e-11)
        code, _, _ = call("compute", "--werner", "0.5", "--measure", "discord", "--basis", "1,1,0")
        assert code == 2

    def test_json_round_trip(self):
        code, out, _ = call("compute", "--bell", "0.3,-0.4,0.56", "--measure", "weak-deficit", "--x", "1",
                            "--method", "both", "--format", "json", "--grid-theta", "16", "--grid-phi", "8")
        assert code == 0
        d = json.loads(out)
        st = from_descriptor(d["state"])
        assert st.params == (0.3, -0.4, 0.56)
        for key in ("closed_form", "numeric"):
            r = MeasureResult.from_dict(d[key])
            assert r.to_dict() == d[key]

    def test_deterministic(self):
        args = ("compute", "--bell", "0.1,0.2,-0.3", "--measure", "super-discord", "--x", "0.7", "--method", "numeric",
                "--format", "json")
        assert call(*args)[1] == call(*args)[1]

    def test_small_grid_rejected(self):
        code, _, _ = call("compute", "--werner", "0.5", "--measure", "discord", "--method", "numeric", "--grid-theta", "4")
        assert code == 2


class TestChannel:
    def test_werner(self):
        code, out, _ = call("channel", "--werner", "0.5", "--measure", "discord", "--p", "0.3")
        assert code == 0 and float(out) == pytest.approx(0.0588051302434, abs=1e-12)

    def test_gamma_t(self):
        code, out, _ = call("channel", "--werner", "0.5", "--measure", "discord", "--gamma", "1", "--t", "0")
        assert code == 0 and float(out) == pytest.approx(0.262483183764, abs=1e-12)

    def test_p_and_gamma_conflict(self):
        code, _, _ = call("channel", "--werner", "0.5", "--measure", "discord", "--p", "0.3", "--gamma", "1", "--t", "1")
        assert code == 2

    def test_bell_precondition(self):
        code, _, err = call("channel", "--bell", "0.5,0.2,0.3", "--measure", "discord", "--p", "0.3")
        assert code == 1 and "numeric" in err
        code, out, _ = call("channel", "--bell", "0.5,0.2,0.3", "--measure", "discord", "--p", "0.3", "--method",
                            "numeric", "--grid-theta", "16", "--grid-phi", "8")
        assert code == 0 and float(out) > 0

    def test_both(self):
        code, out, _ = call("channel", "--werner", "0.7", "--measure", "weak-deficit", "--x", "1", "--p", "0.4",
                            "--method", "both", "--format", "csv")
        assert code == 0
        header, row = out.strip().splitlines()
        assert header == "closed_form,numeric,difference"
        assert abs(float(row.split(",")[2])) <= 1e-9


class TestSweepSurface:
    def test_sweep_csv(self, tmp_path):
        path = tmp_path / "werner.csv"
        code, out, _ = call("sweep", "--x", "0.2", "--out", str(path))
        assert code == 0 and out == ""
        lines = path.read_text().splitlines()
        assert lines[0] == "z,x,discord,super-discord,deficit,weak-deficit"
        assert len(lines) == 102

    def test_sweep_json(self):
        code, out, _ = call("sweep", "--family", "bell_diagonal", "--c", "0.3,-0.4,0.56", "--measures", "super-discord",
                            "--x", "0.5:3:0.5", "--p", "0:1:0.5", "--format", "json")
        d = json.loads(out)
        assert code == 0 and len(d["rows"]) == 18

    def test_sweep_needs_x_for_weak(self):
        code, _, _ = call("sweep", "--measures", "super-discord")
        assert code == 2

    def test_surface(self, tmp_path):
        path = tmp_path / "s.csv"
        code, _, err = call("surface", "--measure", "discord", "--target", "0.15", "--resolution", "24",
                            "--spot-check", "0", "--out", str(path))
        assert code == 0 and "points" in err
        assert path.read_text().splitlines()[0] == "c1,c2,c3,residual"

    def test_surface_bad_target(self):
        code, _, _ = call("surface", "--measure", "discord", "--target", "0")
        assert code == 1


class TestSelfcheck:
    def test_passes(self):
        code, out, _ = call("selfcheck", "--samples", "5", "--x", "1.0", "--grid-theta", "16", "--grid-phi", "8")
        assert code == 0 and "PASS" in out


def test_fmt():
    assert fmt(0.0) == "0.0"
    assert fmt(1) == "1.0"
    assert fmt(0.1 + 0.2) == "0.3"
    assert fmt(1e-20) == "1e-20"


def test_console_entry_point():
    proc = subprocess.run([sys.executable, "-m", "qcorr.cli", "compute", "--werner", "1", "--measure", "discord"],
                          capture_output=True, text=True)
    assert proc.returncode == 0 and proc.stdout.strip() == "1.0"


def test_selfcheck_hundred_samples():
    code, out, _ = call("selfcheck", "--samples", "100", "--x", "1.0", "--threads", "4")
    assert code == 0, out
