import csv
import json
import math
import subprocess
import sys
import xml.etree.ElementTree as ET

import numpy as np
import pytest

from bcqd.bands import CriticalValues, Method
from bcqd.cli import main
from bcqd.distributions import quantile
from bcqd.estimator import Grid, bc_kqd, default_bandwidth, standard_grid
from bcqd.kernels import KernelName, kernel_make


def write_column(path, values, header="x"):
    lines = ([header] if header else []) + [repr(float(v)) for v in values]
    path.write_text("\n".join(lines) + "\n")
    return path


def read_rows(path):
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


@pytest.fixture
def linear_5000(tmp_path):
    u = np.random.default_rng(17).random(5000)
    return write_column(tmp_path / "linear.csv", quantile("linear", u))


def test_estimate_hand_example(tmp_path):
    data = write_column(tmp_path / "five.csv", [0.9, 0.1, 0.5, 0.2, 0.7], header=None)
    grid = tmp_path / "grid.txt"
    grid.write_text("0.5\n")
    out = tmp_path / "est.csv"
    rc = main(["estimate", str(data), "--kernel", "rect", "--h", "0.5", "--grid", str(grid),
               "--out", str(out)])
    assert rc == 0
    (row,) = read_rows(out)
    assert float(row["u"]) == 0.5
    assert float(row["qhat"]) == pytest.approx(1.0, abs=1e-15)
    assert float(row["psi"]) == 1.0
    assert float(row["qhat_bc"]) == pytest.approx(1.0, abs=1e-15)


def test_estimate_round_trips_to_library(tmp_path, linear_5000):
    out = tmp_path / "est.csv"
    assert main(["estimate", str(linear_5000), "--out", str(out)]) == 0
    rows = read_rows(out)
    values = np.sort(np.loadtxt(linear_5000, skiprows=1))
    est = bc_kqd(values, kernel_make("truncnormal"), default_bandwidth(5000).h, standard_grid())
    assert len(rows) == len(standard_grid())
    got = np.array([float(r["qhat_bc"]) for r in rows])
    np.testing.assert_allclose(got, est.qhat_bc, rtol=1e-12)
    manifest = json.loads((tmp_path / "est.csv.manifest.json").read_text())
    assert manifest["config"]["h"] == pytest.approx(0.0410, abs=5e-5)
    assert manifest["argv"][0] == "estimate"


def test_empty_file_is_a_data_error(tmp_path, capsys):
    empty = tmp_path / "empty.csv"
    empty.write_text("")
    assert main(["estimate", str(empty), "--out", str(tmp_path / "o.csv")]) == 2
    assert "empty.csv" in capsys.readouterr().err


def test_non_numeric_rows_reported_with_line_numbers(tmp_path, capsys):
    bad = tmp_path / "bad.csv"
    bad.write_text("value\n0.1\nabc\n0.3\n\nxyz\n")
    assert main(["estimate", str(bad), "--out", str(tmp_path / "o.csv")]) == 2
    err = capsys.readouterr().err
    assert "3" in err and "6" in err


def test_bandwidth_too_small_is_a_data_error(tmp_path, capsys):
    data = write_column(tmp_path / "d.csv", np.linspace(0, 1, 10))
    assert main(["estimate", str(data), "--h", "0.05", "--out", str(tmp_path / "o.csv")]) == 2


def test_usage_errors(tmp_path):
    data = write_column(tmp_path / "d.csv", np.linspace(0, 1, 50))
    out = str(tmp_path / "o.json")
    assert main(["band", str(data), "--level", "1.5", "--out", out]) == 1
    assert main(["estimate", str(data), "--kernel", "gaussian", "--out", out]) == 1
    assert main(["coverage", "--dist", "uniform", "--n", "100", "--reps", "50",
                 "--n-sims", "1000", "--out", out]) == 1
    assert main(["critvals", "--n", "100", "--n-sims", "10", "--out", out]) == 1
    assert main(["frobnicate"]) == 1


def zero_table(tmp_path, n, h, grid_points):
    taus = (0.95, 0.975)
    cv = CriticalValues(
        method=Method.KnownProcess, n=n, h=h, kernel_name=KernelName.TruncatedNormal,
        grid=Grid(grid_points), n_sims=20000, seed=0,
        one_sided={t: 0.0 for t in taus}, absolute={t: 0.0 for t in taus},
    )
    path = tmp_path / "zeros.json"
    path.write_text(cv.to_json())
    return path


def test_band_with_zero_critical_values_collapses(tmp_path, linear_5000):
    h = default_bandwidth(5000).h
    table = zero_table(tmp_path, 5000, h, standard_grid().points)
    out = tmp_path / "band.csv"
    assert main(["band", str(linear_5000), "--critvals", str(table), "--out", str(out)]) == 0
    for row in read_rows(out):
        assert float(row["lower"]) == float(row["qhat_bc"]) == float(row["upper"])


def test_band_outputs_are_byte_identical(tmp_path, linear_5000):
    outs = []
    for k, threads in enumerate(("1", "4")):
        out = tmp_path / f"band{k}.csv"
        js = tmp_path / f"band{k}.json"
        assert main(["band", str(linear_5000), "--level", "0.9", "--n-sims", "2000",
                     "--seed", "3", "--threads", threads, "--json", str(js),
                     "--out", str(out)]) == 0
        outs.append((out.read_bytes(), js.read_bytes()))
    assert outs[0] == outs[1]


def test_band_json_and_svg(tmp_path):
    u = np.random.default_rng(2).random(100)
    data = write_column(tmp_path / "small.csv", quantile("linear", u))
    js, svg = tmp_path / "b.json", tmp_path / "b.svg"
    rc = main(["band", str(data), "--level", "0.99", "--n-sims", "1000", "--json", str(js),
               "--svg", str(svg), "--out", str(tmp_path / "b.csv")])
    assert rc == 0
    band = json.loads(js.read_text())
    # infinite endpoints are encoded as null, never as a bare Infinity token
    assert "Infinity" not in js.read_text()
    for value, flag in zip(band["upper"], band["upper_unbounded"]):
        assert (value is None) == flag
    root = ET.fromstring(svg.read_text())
    assert root.tag.endswith("svg")


def test_critvals_table(tmp_path):
    out = tmp_path / "cv.json"
    argv = ["critvals", "--n", "1000", "--n-sims", "2000", "--taus", "0.8,0.9,0.95",
            "--seed", "4", "--out", str(out)]
    assert main(argv) == 0
    first = out.read_bytes()
    data = json.loads(first)
    assert set(data["one_sided"]) == {"0.8", "0.9", "0.95"}
    vals = [data["absolute"][k] for k in ("0.8", "0.9", "0.95")]
    assert vals == sorted(vals) and vals[0] > 0
    assert main(argv) == 0
    assert out.read_bytes() == first
    assert CriticalValues.from_json(first.decode()).method is Method.KnownProcess


def test_replay_reproduces_outputs(tmp_path):
    out = tmp_path / "cv.json"
    assert main(["critvals", "--n", "500", "--n-sims", "1000", "--method", "pseudo",
                 "--out", str(out)]) == 0
    before = out.read_bytes()
    out.unlink()
    assert main(["replay", str(tmp_path / "cv.json.manifest.json")]) == 0
    assert out.read_bytes() == before


def test_repeated_bands_cover_at_nominal_rate(tmp_path):
    # fixed tabulated values, fresh data each call: two-sided 90% bands
    n, h, grid = 5000, default_bandwidth(5000).h, standard_grid()
    table = tmp_path / "cv.json"
    assert main(["critvals", "--n", str(n), "--n-sims", "4000", "--taus", "0.9,0.95",
                 "--seed", "8", "--out", str(table)]) == 0
    truth = 2.0 / np.sqrt(1.0 + 8.0 * grid.points)
    hits, calls = 0, 60
    for k in range(calls):
        u = np.random.default_rng(500 + k).random(n)
        data = write_column(tmp_path / "d.csv", quantile("linear", u))
        out = tmp_path / "b.csv"
        assert main(["band", str(data), "--level", "0.9", "--critvals", str(table),
                     "--out", str(out)]) == 0
        rows = read_rows(out)
        lower = np.array([float(r["lower"]) for r in rows])
        upper = np.array([float(r["upper"]) for r in rows])
        hits += bool(np.all((lower <= truth) & (truth <= upper)))
    frac = hits / calls
    assert abs(frac - 0.949) <= 3 * math.sqrt(0.949 * 0.051 / calls) + 0.02
    assert h == pytest.approx(0.0410, abs=5e-5)


def test_coverage_command(tmp_path, capsys):
    out, table = tmp_path / "cov.json", tmp_path / "cov.csv"
    rc = main(["coverage", "--dist", "uniform", "--n", "100", "--reps", "400",
               "--n-sims", "4000", "--seed", "5", "--csv", str(table), "--out", str(out)])
    assert rc == 0
    report = json.loads(out.read_text())
    expected = {"0.8": 0.891, "0.9": 0.936, "0.95": 0.962, "0.99": 0.986}
    for key, target in expected.items():
        p = report["coverage"][key]
        assert abs(p - target) <= 3 * math.sqrt(target * (1 - target) / 400) + 0.02
    rows = list(csv.reader(table.open()))
    assert rows[0][:2] == ["distribution", "n"] and rows[1][:2] == ["uniform", "100"]
    assert "level 0.95" in capsys.readouterr().out


def test_console_script_entry_point(tmp_path):
    proc = subprocess.run([sys.executable, "-m", "bcqd.cli", "--version"],
                          capture_output=True, text=True)
    assert proc.returncode == 0 and proc.stdout.startswith("bcqd")
