import csv
import json
import xml.etree.ElementTree as ET

import numpy as np
import pytest

from eqstab.cli import run_cli
from eqstab.greitzer import eigen_sweep
from eqstab.report import Line, PlotSeries, dumps_report, emit_csv, emit_svg, render_svg
from eqstab.sim import integrate
from eqstab.sysdef import builtin

SVG_NS = "{http://www.w3.org/2000/svg}"


def run(args, capsys):
    code = run_cli(args)
    out, err = capsys.readouterr()
    return code, out, err


def test_analyze_example2(capsys):
    code, out, _ = run(["analyze", "--builtin", "example2", "--region", "0.01:10"], capsys)
    assert code == 0
    rep = json.loads(out)
    assert rep["schema"] == 1 and rep["tool"] == "eqstab"
    assert rep["verdict"]["kind"] == "GloballyAsymptoticallyStable"
    assert rep["spectrum"] == [{"re": -0.5, "im": 0.0}]
    assert len(rep["system"]["digest"]) == 64


def test_compressor_boundary(capsys):
    code, out, _ = run(["compressor", "boundary"], capsys)
    assert code == 0
    rep = json.loads(out)
    assert 0.43 < rep["phi_surge"] < 0.44
    assert rep["koff_reference_phi"] == 0.48


def test_missing_file_is_usage_error(capsys):
    code, out, err = run(["analyze", "--file", "nosuch.sys", "--region", "0:1"], capsys)
    assert code == 2 and out == ""
    assert "nosuch.sys" in err


@pytest.mark.parametrize("args", [
    ["frobnicate"],
    ["analyze", "--builtin", "example2"],
    ["analyze", "--builtin", "example3", "--region", "0:1,0:1,0:1"],
    ["analyze", "--builtin", "greitzer", "--region", "0:1"],
    ["simulate", "--builtin", "example2"],
    ["compressor", "surge"],
])
def test_usage_errors(args, capsys):
    assert run(args, capsys)[0] == 2


def test_analysis_failure_exit_1(capsys):
    code, out, err = run(["popov", "--builtin", "example1", "--region", "0:10"], capsys)
    assert code == 1
    assert json.loads(out)["status"] == "precondition_failed"
    assert "Hurwitz" in err
    code, out, err = run(["compressor", "surge", "--g", "1e-9"], capsys)
    assert code == 1 and json.loads(out)["status"] == "error"


def test_unwritable_output_exit_1(tmp_path, capsys):
    code, _, err = run(["analyze", "--builtin", "example2", "--region", "0.01:10",
                        "--out", str(tmp_path / "missing" / "r.json")], capsys)
    assert code == 1 and "cannot write" in err


def test_bad_system_file_exit_1(tmp_path, capsys):
    f = tmp_path / "bad.sys"
    f.write_text("dim 2\nx1' = x3\nx2' = 0\n")
    code, out, err = run(["analyze", "--file", str(f), "--region", "0:1"], capsys)
    assert code == 1 and "line 2" in err


def test_file_system_and_outputs(tmp_path, capsys):
    f = tmp_path / "osc.sys"
    f.write_text("# damped oscillator\ndim 2\nx1' = x2\nx2' = -x1 - x2\n")
    out = tmp_path / "r.json"
    code, stdout, _ = run(["simulate", "--file", str(f), "--x0", "1,0", "--t-end", "5",
                           "--out", str(out), "--csv", str(tmp_path / "t.csv"),
                           "--svg", str(tmp_path / "t.svg")], capsys)
    assert code == 0 and stdout == ""
    rep = json.loads(out.read_text())
    assert rep["trajectory"]["termination"] == "ReachedTEnd"
    rows = list(csv.reader((tmp_path / "t.csv").open()))
    assert rows[0] == ["t", "x1", "x2"]
    assert float(rows[1][1]) == 1.0
    ET.parse(tmp_path / "t.svg")


def test_csv_round_trip(tmp_path):
    tr = integrate(builtin("example3"), [0.3, 1.7], 2.0)
    path = tmp_path / "traj.csv"
    emit_csv(tr, path)
    raw = path.read_bytes()
    assert b"\r" not in raw and raw.endswith(b"\n")
    data = np.loadtxt(path, delimiter=",", skiprows=1)
    np.testing.assert_array_equal(data[:, 0], tr.t)
    np.testing.assert_array_equal(data[:, 1:], tr.x)


def test_sweep_csv_schema(tmp_path):
    path = tmp_path / "sweep.csv"
    emit_csv(eigen_sweep(np.linspace(0.1, 0.7, 5)), path)
    lines = path.read_text().splitlines()
    assert lines[0] == "phi,psi_c,g,real_part,discriminant,eig_re,eig_im"
    assert len(lines) == 6
    assert float(lines[1].split(",")[6]) > 0


def test_empty_series_header_only(tmp_path):
    path = tmp_path / "empty.csv"
    emit_csv([], path)
    assert path.read_text() == "phi,psi_c,g,real_part,discriminant,eig_re,eig_im\n"


def test_plot_series_validation():
    with pytest.raises(ValueError):
        Line("a", [1, 2], [1])
    with pytest.raises(ValueError):
        Line("a", [1, 2], [1, float("nan")])


def test_svg_structure_and_determinism(tmp_path):
    s = PlotSeries("Real part versus flow", "phi", "real part",
                   (Line("re", [0.1, 0.4, 0.7], [0.05, 0.0, -0.2]), Line("zero", [0.1, 0.7], [0, 0])))
    a = render_svg(s, 400, 300, title="t")
    assert a == render_svg(s, 400, 300, title="t")
    root = ET.fromstring(a)
    assert root.get("width") == "400"
    assert len(root.findall(f"{SVG_NS}polyline")) == 2
    emit_svg(s, tmp_path / "a.svg")
    assert (tmp_path / "a.svg").read_text().startswith("<?xml")


def test_svg_single_point_marker():
    root = ET.fromstring(render_svg(PlotSeries.single("pt", "x", "y", [1.0], [2.0])))
    assert len(root.findall(f"{SVG_NS}circle")) == 1
    with pytest.raises(ValueError):
        render_svg(PlotSeries("none", "x", "y", ()))


def test_json_handles_special_values():
    text = dumps_report({"a": np.float64(1.5), "b": complex(1, -2), "c": float("inf"),
                         "d": np.arange(2), "e": (np.True_,)})
    assert json.loads(text) == {"a": 1.5, "b": {"re": 1.0, "im": -2.0}, "c": None,
                                "d": [0, 1], "e": [True]}


def test_every_subcommand_runs(tmp_path, capsys):
    cases = [
        ["portrait", "--builtin", "example3", "--region", "0:2", "--seeds", "3",
         "--csv", str(tmp_path / "p.csv"), "--svg", str(tmp_path / "p.svg")],
        ["sweep-eig", "--builtin", "example3", "--region=-1:2", "--grid", "3",
         "--csv", str(tmp_path / "f.csv")],
        ["bendixson", "--builtin", "example3", "--region=-1:2", "--grid", "5"],
        ["compressor", "characteristic", "--grid", "11"],
        ["compressor", "sweep", "--grid", "20"],
    ]
    for args in cases:
        code, out, err = run(args, capsys)
        assert code == 0, (args, err)
        assert json.loads(out)["schema"] == 1
    header = (tmp_path / "f.csv").read_text().splitlines()[0]
    assert header == "x1,x2,eig1_re,eig1_im,eig2_re,eig2_im"
