"""File writers and readers: metrics CSV, legacy VTK fields, PGM slices."""

from __future__ import annotations

import csv
import math
from pathlib import Path

import numpy as np

CSV_COLUMNS = ("case", "dies_per_layer", "n_layers", "interposer_material", "thickness_um", "tdp_w",
               "t_max_K", "hotspot_area_mm2", "R_KperW", "mean_K", "std_K", "iters", "wall_ms")
AXES = {"x": 2, "y": 1, "z": 0}  # axis name -> array axis of (nz, ny, nx)


def _fmt(value) -> str:
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    value = float(value)
    if math.isnan(value):
        return "nan"
    return f"{value:.12g}"


def metrics_rows(report, wall_times: bool = True):
    for r in report.rows:
        yield [r.label, _fmt(r.dies_per_layer), _fmt(r.n_layers), r.interposer_material,
               _fmt(r.thickness_um), _fmt(r.tdp_w), _fmt(r.t_max), _fmt(r.hotspot_area * 1e6),
               _fmt(r.R), _fmt(r.mean), _fmt(r.std), _fmt(r.iterations),
               _fmt(r.wall_ms) if wall_times else "0"]


def write_metrics_csv(report, path, wall_times: bool = True) -> Path:
    """Header plus one row per case, LF line endings.

    ``wall_times=False`` writes 0 in the wall_ms column so reports from
    different runs can be compared byte for byte.
    """
    if not report.rows:
        raise ValueError("refusing to write an empty report")
    path = Path(path)
    try:
        with path.open("w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(CSV_COLUMNS)
            writer.writerows(metrics_rows(report, wall_times))
    except OSError as exc:
        raise OSError(f"cannot write metrics CSV {path}: {exc}") from exc
    return path


def read_metrics_csv(path) -> list[dict]:
    with Path(path).open(newline="", encoding="utf-8") as fh:
        return list(csv.DictReader(fh))


def write_traces_csv(report, path) -> Path | None:
    """Time column plus one GPU-max column per transient case."""
    rows = [r for r in report.rows if r.trace_times is not None]
    if not rows:
        return None
    path = Path(path)
    times = rows[0].trace_times
    with path.open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["time_s"] + [f"{r.label}_gpu_max_K" for r in rows])
        for i, t in enumerate(times):
            writer.writerow([_fmt(t)] + [_fmt(r.trace_gpu_max[i]) for r in rows])
    return path


def write_field_vtk(field, model, path) -> Path:
    """Legacy ASCII VTK structured points, one scalar per cell center, x fastest.

    ORIGIN is the first cell center and SPACING the mean cell size per axis;
    the simulation grid may be non-uniform, so positions are nominal.
    """
    values = np.asarray(getattr(field, "values", field), dtype=float)
    if values.shape != model.shape:
        raise ValueError(f"field shape {values.shape} does not match model {model.shape}")
    nz, ny, nx = values.shape
    origin = [model.centers(a)[0] for a in range(3)]
    spacing = [float(np.mean(d)) for d in (model.dx, model.dy, model.dz)]
    flat = values.ravel()
    lines = [
        "# vtk DataFile Version 3.0",
        "stackthermal temperature field (cell centers, nominal spacing)",
        "ASCII",
        "DATASET STRUCTURED_POINTS",
        f"DIMENSIONS {nx} {ny} {nz}",
        "ORIGIN " + " ".join(_fmt(v) for v in origin),
        "SPACING " + " ".join(_fmt(v) for v in spacing),
        f"POINT_DATA {flat.size}",
        "SCALARS temperature_K double 1",
        "LOOKUP_TABLE default",
    ]
    body = [" ".join(_fmt(v) for v in flat[i:i + 8]) for i in range(0, flat.size, 8)]
    path = Path(path)
    try:
        path.write_text("\n".join(lines + body) + "\n", encoding="ascii")
    except OSError as exc:
        raise OSError(f"cannot write VTK file {path}: {exc}") from exc
    return path


def read_field_vtk(path) -> np.ndarray:
    """Temperature array of shape (nz, ny, nx) from a file written by ``write_field_vtk``."""
    tokens = Path(path).read_text(encoding="ascii").split("\n")
    dims = None
    start = None
    for i, line in enumerate(tokens):
        if line.startswith("DIMENSIONS"):
            dims = tuple(int(v) for v in line.split()[1:4])
        if line.startswith("LOOKUP_TABLE"):
            start = i + 1
            break
    if dims is None or start is None:
        raise ValueError(f"{path}: not a structured-points scalar file")
    data = np.array(" ".join(tokens[start:]).split(), dtype=float)
    nx, ny, nz = dims
    if data.size != nx * ny * nz:
        raise ValueError(f"{path}: expected {nx * ny * nz} values, found {data.size}")
    return data.reshape(nz, ny, nx)


def slice_field(values, axis: str, index: int) -> np.ndarray:
    """2D slice; rows run along increasing y (z slices) or increasing z (x/y slices)."""
    a = AXES[axis]
    if not 0 <= index < values.shape[a]:
        raise IndexError(f"{axis} index {index} outside 0..{values.shape[a] - 1}")
    return np.take(values, index, axis=a)


def to_gray(plane, t_min: float, t_max: float) -> np.ndarray:
    if not t_max > t_min:
        raise ValueError(f"degenerate temperature range [{t_min}, {t_max}]")
    scaled = np.clip((np.asarray(plane, dtype=float) - t_min) / (t_max - t_min), 0.0, 1.0)
    return np.floor(scaled * 255 + 0.5).astype(np.uint8)


def render_slice_pgm(values, axis: str, index: int, t_min: float, t_max: float, path) -> Path:
    """Binary PGM (P5), one pixel per cell; first image row is the lowest y (or z)."""
    gray = to_gray(slice_field(np.asarray(values, dtype=float), axis, index), t_min, t_max)
    h, w = gray.shape
    path = Path(path)
    path.write_bytes(f"P5\n{w} {h}\n255\n".encode("ascii") + gray.tobytes())
    return path


def read_pgm(path) -> np.ndarray:
    raw = Path(path).read_bytes()
    fields, pos = [], 0
    while len(fields) < 4:
        while raw[pos:pos + 1].isspace():
            pos += 1
        end = pos
        while end < len(raw) and not raw[end:end + 1].isspace():
            end += 1
        if end == pos:
            raise ValueError(f"{path}: truncated PGM header")
        fields.append(raw[pos:end])
        pos = end
    pos += 1  # single whitespace byte before the raster
    if fields[0] != b"P5":
        raise ValueError(f"{path}: not a binary PGM")
    w, h, maxval = (int(f) for f in fields[1:])
    if maxval != 255:
        raise ValueError(f"{path}: unsupported maxval {maxval}")
    return np.frombuffer(raw[pos:pos + w * h], dtype=np.uint8).reshape(h, w)
