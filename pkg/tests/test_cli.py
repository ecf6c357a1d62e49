import csv
import io
import json
import math

import pytest

from isomoment.cli import SWEEP_COLUMNS, default_grid, main, parse_profile

from conftest import DISK, ELLIPSE, PEANUT


@pytest.fixture
def spec_file(tmp_path):
    def write(doc, name="curve.json"):
        path = tmp_path / name
        path.write_text(json.dumps(doc))
        return str(path)

    return write


def run(argv, capsys):
    code = main(argv)
    out, err = capsys.readouterr()
    return code, out, err


def test_info_disk(spec_file, capsys):
    code, out, _ = run(["info", "--spec", spec_file(DISK)], capsys)
    assert code == 0
    doc = json.loads(out)
    assert abs(doc["values"]["length"] - 2 * math.pi) <= 1e-10
    assert abs(doc["values"]["inradius"] - 1.0) <= 1e-9
    assert doc["summary"]["failed"] == 0
    assert "timestamp" in doc["provenance"]


def test_info_ellipse_yaml(tmp_path, capsys):
    path = tmp_path / "ellipse.yaml"
    path.write_text("kind: preset\nname: ellipse\na: 2\nb: 1\n")
    code, out, _ = run(["info", "--spec", str(path)], capsys)
    assert code == 0
    assert abs(json.loads(out)["values"]["kappa_max"] - 2.0) <= 1e-6


def test_info_figure_eight_is_rejected(spec_file, capsys):
    eight = {"kind": "fourier_xy", "x": {"sin": [0, 1]}, "y": {"sin": [1]}}
    code, out, err = run(["info", "--spec", spec_file(eight), "--n", "512"], capsys)
    assert code == 2 and out == ""
    assert json.loads(err.splitlines()[-1])["error"] == "not simple"


def test_missing_spec_file(capsys):
    code, _, err = run(["info", "--spec", "/nonexistent/curve.json"], capsys)
    assert code == 2
    assert "error" in json.loads(err.splitlines()[-1])


def test_sweep_csv(spec_file, capsys):
    code, out, err = run(["sweep", "--spec", spec_file(PEANUT), "--steps", "6", "--p", "1"], capsys)
    assert code == 0
    rows = list(csv.DictReader(io.StringIO(out)))
    assert tuple(rows[0].keys()) == SWEEP_COLUMNS
    assert len(rows) == 6
    regular = [r for r in rows if r["regular"] == "true"]
    assert {r["n_components"] for r in regular} == {"1", "2"}
    assert all(float(r["moment_margin"]) > 0 for r in regular)
    # the third grid point sits on the neck pinch, where the level is flagged and left unchecked
    pinched = [r for r in rows if r["regular"] == "false"]
    assert len(pinched) == 1 and abs(float(pinched[0]["t"]) - 0.3) <= 0.01
    assert pinched[0]["len_St"] == ""
    assert "0 failed" in err


def test_sweep_report_and_out_file(spec_file, tmp_path, capsys):
    out_path = tmp_path / "sweep.json"
    code, out, _ = run(["sweep", "--spec", spec_file(ELLIPSE), "--steps", "3", "--format", "report",
                        "--out", str(out_path)], capsys)
    assert code == 0 and out == ""
    doc = json.loads(out_path.read_text())
    assert doc["summary"]["total"] >= 3 * 5
    assert doc["summary"]["failed"] == 0


def test_sweep_rejects_large_p(spec_file, capsys):
    code, _, _ = run(["sweep", "--spec", spec_file(DISK), "--p", "3"], capsys)
    assert code == 2


def test_sweep_rejects_grid_beyond_inradius(spec_file, capsys):
    code, _, _ = run(["sweep", "--spec", spec_file(DISK), "--t-min", "0.5", "--t-max", "1.5"], capsys)
    assert code == 2


def test_default_grid_stays_inside():
    grid = default_grid(1.0, 4)
    assert list(grid) == [0.125, 0.375, 0.625, 0.875]


def test_cover_disk(spec_file, capsys):
    code, out, _ = run(["cover", "--spec", spec_file(DISK), "--t", "0.25", "--format", "report"], capsys)
    assert code == 0
    doc = json.loads(out)
    assert doc["values"]["pieces"] == [["arc", 0]]
    assert doc["values"]["segment_lengths"] == []


def test_cover_peanut_csv_and_svg(spec_file, capsys):
    spec = spec_file(PEANUT)
    code, out, _ = run(["cover", "--spec", spec, "--t", "0.5"], capsys)
    assert code == 0
    rows = list(csv.DictReader(io.StringIO(out)))
    assert {r["kind"] for r in rows} == {"arc", "segment"}
    code, out, _ = run(["cover", "--spec", spec, "--t", "0.5", "--format", "svg"], capsys)
    assert code == 0 and out.startswith("<svg") and out.rstrip().endswith("</svg>")


def test_cover_beyond_inradius(spec_file, capsys):
    code, _, _ = run(["cover", "--spec", spec_file(DISK), "--t", "1.5"], capsys)
    assert code == 2


def test_fuglede_command(capsys):
    code, out, _ = run(["fuglede", "--p", "4"], capsys)
    assert code == 0
    doc = json.loads(out)
    assert abs(doc["values"]["F"] - math.pi) <= 1e-9


def test_fuglede_rejects_odd_profile(capsys):
    code, _, _ = run(["fuglede", "--p", "2", "--profile", "cos3"], capsys)
    assert code == 2


def test_parse_profile():
    assert parse_profile("sin2").sin_coeffs == (0.0, 1.0)
    r = parse_profile('{"mean": 0.5, "cos": [0, 0.2]}')
    assert r.mean == 0.5 and r.cos_coeffs == (0.0, 0.2)


def test_optimize_command(capsys):
    code, out, _ = run(["optimize", "--p", "2", "--restarts", "3", "--budget", "400", "--seed", "1"], capsys)
    assert code == 0
    doc = json.loads(out)
    assert doc["values"]["lower_bound"] is True
    assert doc["values"]["best_J"] <= 1 + 1e-4


def test_optimize_large_p_is_unchecked(capsys):
    code, out, _ = run(["optimize", "--p", "4", "--restarts", "2", "--budget", "300"], capsys)
    assert code == 0
    assert json.loads(out)["summary"]["unchecked"] == 1


def test_sweep_is_deterministic(spec_file, capsys):
    argv = ["sweep", "--spec", spec_file(PEANUT), "--steps", "4"]
    _, first, _ = run(argv, capsys)
    _, second, _ = run(argv, capsys)
    _, parallel, _ = run(argv + ["--jobs", "2"], capsys)
    assert first == second == parallel
