from pathlib import Path

import numpy as np
import pytest

from stackthermal import export
from stackthermal.analysis import hotspot
from stackthermal.export import (CSV_COLUMNS, read_field_vtk, read_metrics_csv, read_pgm, render_slice_pgm,
                                 slice_field, to_gray, write_field_vtk, write_metrics_csv, write_traces_csv)
from stackthermal.materials import Material
from stackthermal.solve import solve_steady
from stackthermal.stack import StackSpec, VoxelModel, voxelize
from stackthermal.sweep import CaseResult, SweepReport

GOLDEN = Path(__file__).parent / "data" / "golden_metrics.csv"


def fixed_report():
    rows = []
    for i, (d, n) in enumerate([(20, 1), (10, 2), (5, 4), (4, 5), (2, 10), (1, 20)]):
        r = CaseResult(f"hbm_{d}x{n}", d, n, "hbn", 300.0, 256.0)
        r.t_max = 400.0 - i * 1.25 + 1e-7
        r.hotspot_area = 60e-6 + i * 1e-6
        r.R = (r.t_max - 298.15) / 276.0
        r.mean, r.std = 390.0 - i, 2.0 + 0.1 * i
        r.iterations = 500 + i
        r.wall_ms = 1234.5 + i
        rows.append(r)
    return SweepReport("hbm_distribution", rows)


def test_csv_golden(tmp_path):
    path = write_metrics_csv(fixed_report(), tmp_path / "m.csv")
    assert path.read_bytes() == GOLDEN.read_bytes()


def test_csv_shape_and_columns(tmp_path):
    path = write_metrics_csv(fixed_report(), tmp_path / "m.csv")
    lines = path.read_text().splitlines()
    assert len(lines) == 7
    assert lines[0].split(",") == list(CSV_COLUMNS)
    rows = read_metrics_csv(path)
    assert rows[2]["case"] == "hbm_5x4" and float(rows[2]["t_max_K"]) == pytest.approx(397.5 + 1e-7)


def test_empty_report_writes_nothing(tmp_path):
    with pytest.raises(ValueError):
        write_metrics_csv(SweepReport("x", []), tmp_path / "m.csv")
    assert not (tmp_path / "m.csv").exists()


def test_csv_io_error_names_path(tmp_path):
    with pytest.raises(OSError, match="missing"):
        write_metrics_csv(fixed_report(), tmp_path / "missing" / "m.csv")


def test_traces(tmp_path):
    report = fixed_report()
    assert write_traces_csv(report, tmp_path / "t.csv") is None
    report.rows[0].trace_times = np.array([0.0, 0.5])
    report.rows[0].trace_gpu_max = np.array([300.0, 301.0])
    lines = write_traces_csv(report, tmp_path / "t.csv").read_text().splitlines()
    assert lines == ["time_s,hbm_20x1_gpu_max_K", "0,300", "0.5,301"]


def test_vtk_two_cube(tmp_path):
    mat = Material.isotropic("m", 1.0, 1.0, 1.0)
    model = VoxelModel.homogeneous([0, 1, 2], [0, 1, 2], [0, 1, 2], mat)
    values = np.arange(8, dtype=float).reshape(2, 2, 2) + 300
    path = write_field_vtk(values, model, tmp_path / "f.vtk")
    text = path.read_text()
    assert "DIMENSIONS 2 2 2" in text
    assert text.startswith("# vtk DataFile Version 3.0")
    body = text.split("LOOKUP_TABLE default\n")[1].split()
    assert len(body) == 8
    np.testing.assert_array_equal(read_field_vtk(path), values)


def test_vtk_shape_mismatch(tmp_path):
    mat = Material.isotropic("m", 1.0, 1.0, 1.0)
    model = VoxelModel.homogeneous([0, 1, 2], [0, 1, 2], [0, 1, 2], mat)
    with pytest.raises(ValueError):
        write_field_vtk(np.zeros((1, 2, 2)), model, tmp_path / "f.vtk")


def test_gray_extremes():
    assert np.all(to_gray(np.full((2, 3), 300.0), 300.0, 400.0) == 0)
    assert np.all(to_gray(np.full((2, 3), 400.0), 300.0, 400.0) == 255)
    with pytest.raises(ValueError):
        to_gray(np.zeros((1, 1)), 1.0, 1.0)


def test_pgm_roundtrip_including_whitespace_bytes(tmp_path):
    values = np.zeros((1, 3, 4))
    values[0] = np.array([[0, 9, 10, 32], [13, 255, 11, 12], [1, 2, 3, 4]]) / 255.0
    path = render_slice_pgm(values, "z", 0, 0.0, 1.0, tmp_path / "s.pgm")
    img = read_pgm(path)
    assert img.shape == (3, 4)
    np.testing.assert_array_equal(img, np.array([[0, 9, 10, 32], [13, 255, 11, 12], [1, 2, 3, 4]]))


def test_slice_axes():
    values = np.arange(24).reshape(2, 3, 4)
    assert slice_field(values, "z", 1).shape == (3, 4)
    assert slice_field(values, "y", 0).shape == (2, 4)
    assert slice_field(values, "x", 3).shape == (2, 3)
    with pytest.raises(IndexError):
        slice_field(values, "z", 2)


def test_brightest_pixel_is_hotspot(tmp_path):
    model = voxelize(StackSpec(interposer_material="hbn"), 1e-3, 1)
    field = solve_steady(model)
    spot = hotspot(field, model.gpu_mask(), 5.0, model.cell_area)
    ix, iy, iz = spot.location
    path = write_field_vtk(field, model, tmp_path / "f.vtk")
    values = read_field_vtk(path)
    plane = slice_field(values, "z", iz)
    img = read_pgm(render_slice_pgm(values, "z", iz, float(plane.min()), float(plane.max()), tmp_path / "g.pgm"))
    assert img[iy, ix] == img.max() == 255


def test_fmt_is_stable():
    assert export._fmt(3) == "3"
    assert export._fmt(0.1 + 0.2) == "0.3"
    assert export._fmt(float("nan")) == "nan"
