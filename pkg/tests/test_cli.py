import json
import math
import subprocess
import sys

import pytest

from jetflow import SCHEMA_VERSION, __version__
from jetflow.cli import RunSpec, main, run_sweep
from jetflow.errors import ERROR_CODES, OutsideHillInterval


def _spec(tmp_path, name, **data):
    path = tmp_path / name
    path.write_text(json.dumps(data))
    return str(path)


HARMONIC = {"F": {"n": 1, "k": 1, "coeffs": [[0.0, 1.0]]}, "x_init": 0.0}
CRITICAL = {"F": {"n": 1, "k": 2, "coeffs": [[-1.0, 0.0, 2.0]]}, "interval": 1, "x_init": 0.5}
LINE = {"F": {"n": 1, "k": 0, "coeffs": [[0.6]]}, "duration": 5.0}


def _run(capsys, argv):
    code = main(argv)
    out, err = capsys.readouterr()
    return code, out, err


def _error(err):
    payload = json.loads(err)
    assert payload["error"] in ERROR_CODES
    return payload["error"]


def test_periods_command(tmp_path, capsys):
    code, out, _ = _run(capsys, ["periods", "--spec", _spec(tmp_path, "h.json", **HARMONIC)])
    assert code == 0
    data = json.loads(out)
    assert data["L"] == pytest.approx(2 * math.pi, abs=1e-9)
    assert data["delta_theta"][0][0] == pytest.approx(0.0, abs=1e-12)
    assert data["delta_theta"][0][1] == pytest.approx(math.pi, abs=1e-9)


def test_certify_and_classify(tmp_path, capsys):
    h = _spec(tmp_path, "h.json", **HARMONIC)
    code, out, _ = _run(capsys, ["certify", "--spec", h])
    assert code == 0 and json.loads(out)["verdict"] == "NotPeriodic"
    code, out, _ = _run(capsys, ["classify", "--spec", _spec(tmp_path, "c.json", **CRITICAL)])
    data = json.loads(out)
    assert code == 0 and data["class"] == "Critical"
    assert data["end0"] is True and data["end1"] is False


def test_critical_pair_has_no_period(tmp_path, capsys):
    code, _, err = _run(capsys, ["periods", "--spec", _spec(tmp_path, "c.json", **CRITICAL)])
    assert code == 2 and _error(err) == "infinite_period_critical_pair"


def test_geodesic_csv(tmp_path, capsys):
    out_file = tmp_path / "traj.csv"
    code, out, _ = _run(capsys, ["geodesic", "--spec", _spec(tmp_path, "h.json", **HARMONIC),
                                 "--periods", "3", "--step", "0.001", "--out", str(out_file)])
    assert code == 0
    diag = json.loads(out)
    assert diag["classification"]["class"] == "XPeriodic"
    assert diag["duration"] == pytest.approx(6 * math.pi, abs=1e-8)
    assert diag["arclength_defect"] <= 1e-6 and diag["energy_drift"] <= 1e-9
    lines = out_file.read_text().splitlines()
    assert lines[0] == "t,x,p_x,theta_0_1,theta_1_1"
    assert float(lines[-1].split(",")[0]) == pytest.approx(6 * math.pi, abs=1e-8)


def test_geodesic_line_and_json(tmp_path, capsys):
    out_file = tmp_path / "line.json"
    code, out, _ = _run(capsys, ["geodesic", "--spec", _spec(tmp_path, "l.json", **LINE),
                                 "--step", "0.5", "--out", str(out_file)])
    assert code == 0
    assert json.loads(out)["classification"] == {"class": "Line"}
    data = json.loads(out_file.read_text())
    assert data["x"][-1] == pytest.approx(4.0) and data["theta"][-1] == [[pytest.approx(3.0)]]


@pytest.mark.parametrize("spec, code", [
    (dict(HARMONIC, x_init=1.5), "x_init_outside_hill_interval"),
    (dict(HARMONIC, quadrature_N=4), "invalid_spec"),
    (dict(HARMONIC, px_sign=0), "invalid_spec"),
    ({"F": {"n": 1, "k": 0, "coeffs": [[1.5]]}}, "constant_above_one"),
    ({"F": {"n": 2, "k": 1, "coeffs": [[0.0, 1.0]]}}, "invalid_spec"),
    ({"G": 1}, "invalid_spec"),
])
def test_spec_validation(tmp_path, capsys, spec, code):
    rc, _, err = _run(capsys, ["geodesic", "--spec", _spec(tmp_path, "bad.json", **spec),
                               "--periods", "1"])
    assert rc == 2 and _error(err) == code


def test_runspec_outside_interval():
    with pytest.raises(OutsideHillInterval):
        RunSpec.from_dict(dict(CRITICAL, x_init=-0.5))
    spec = RunSpec.from_dict(dict(CRITICAL, interval=[0.0, 1.0]))
    assert spec.interval.x1 == pytest.approx(1.0)


def test_missing_file_and_bad_json(tmp_path, capsys):
    rc, _, err = _run(capsys, ["periods", "--spec", str(tmp_path / "nope.json")])
    assert rc == 2 and _error(err) == "io_error"
    bad = tmp_path / "bad.json"
    bad.write_text("{")
    rc, _, err = _run(capsys, ["periods", "--spec", str(bad)])
    assert rc == 2 and _error(err) == "invalid_spec"


def test_usage_errors_are_json(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["sweep", "--count", "many"])
    assert exc.value.code == 2
    assert _error(capsys.readouterr().err) == "usage_error"


def test_sweep_deterministic(tmp_path, capsys, monkeypatch):
    outputs = []
    for threads in ("1", "2"):
        monkeypatch.setenv("JETFLOW_THREADS", threads)
        archive = tmp_path / f"a{threads}.jsonl"
        code, out, _ = _run(capsys, ["sweep", "--count", "12", "--seed", "3", "--archive", str(archive)])
        assert code == 0
        outputs.append((out, archive.read_bytes()))
    assert outputs[0] == outputs[1]
    summary = json.loads(outputs[0][0])
    assert summary["count"] == 12 and summary["inconclusive"] == 0


def test_sweep_single_case(tmp_path, capsys):
    archive = tmp_path / "one.jsonl"
    code, _, _ = _run(capsys, ["sweep", "--count", "1", "--seed", "1", "--archive", str(archive)])
    assert code == 0
    lines = archive.read_text().splitlines()
    assert len(lines) == 1 and json.loads(lines[0])["verdict"] == "NotPeriodic"
    with pytest.raises(Exception):
        run_sweep(0, 1, 4, 3)


def test_plot(tmp_path, capsys):
    traj = tmp_path / "t.csv"
    _run(capsys, ["geodesic", "--spec", _spec(tmp_path, "h.json", **HARMONIC), "--periods", "1",
                  "--step", "0.05", "--out", str(traj)])
    code, out, _ = _run(capsys, ["plot", str(traj)])
    assert code == 0
    svg = (tmp_path / "t.svg").read_text()
    assert svg.startswith("<svg") and "<polyline" in svg and "theta_0^1" in svg
    code, _, err = _run(capsys, ["plot", str(traj), "--component", "2"])
    assert code == 2 and _error(err) == "invalid_spec"


def test_plot_line_is_straight(tmp_path, capsys):
    traj = tmp_path / "line.csv"
    _run(capsys, ["geodesic", "--spec", _spec(tmp_path, "l.json", **LINE), "--step", "1",
                  "--out", str(traj)])
    code, _, _ = _run(capsys, ["plot", str(traj), "--out", str(tmp_path / "l.svg")])
    assert code == 0
    points = (tmp_path / "l.svg").read_text().split('points="')[1].split('"')[0].split()
    xy = [tuple(map(float, p.split(","))) for p in points]
    slopes = {round((b[1] - xy[0][1]) / (b[0] - xy[0][0]), 6) for b in xy[1:]}
    assert len(slopes) == 1


@pytest.mark.parametrize("content", ["", "t,x,p_x,theta_0_1\n", "garbage\n1,2\n"])
def test_plot_rejects_bad_trajectories(tmp_path, capsys, content):
    path = tmp_path / "empty.csv"
    path.write_text(content)
    code, _, err = _run(capsys, ["plot", str(path)])
    assert code == 2 and _error(err) == "malformed_trajectory"


def test_version():
    out = subprocess.run([sys.executable, "-m", "jetflow.cli", "--version"],
                         capture_output=True, text=True, check=True).stdout
    assert out.strip() == f"jetflow {__version__} (schema {SCHEMA_VERSION})"
