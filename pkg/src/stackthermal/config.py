"""Strict JSON run configuration.

Values are SI unless the key names a unit (``thickness_um``, ``footprint_mm``,
``dt_s`` ...). Unknown keys are rejected so typos cannot pass silently.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, replace

from .errors import ConfigError
from .materials import MaterialLibrary, builtin_library
from .solve import SolverOptions, TransientSchedule
from .stack import HbmDistribution, LayerSpec, StackSpec
from .sweep import GridOptions, SweepSpec

MM = 1e3
UM = 1e6

SCHEMA = {
    "footprint_mm": None,
    "substrate": {"material", "thickness_um"},
    "hbm": {"total", "per_layer", "die_mm", "gap_mm", "thickness_um", "material", "tsv_fraction", "power_w"},
    "interposer": {"material", "thickness_um", "tsv_fraction"},
    "gpu": {"tdp_w", "power_density_w_cm2", "die_mm", "thickness_um", "material"},
    "tim": {"material", "thickness_um"},
    "heat_sink": {"material", "thickness_um"},
    "fill_material": None,
    "via_material": None,
    "boundary": {"h_top", "h_bottom", "t_ambient"},
    "materials": None,
    "grid": {"cell_um", "cells_per_layer", "max_dz_um"},
    "solver": {"rel_tol", "max_iters", "preconditioner"},
    "transient": {"dt_s", "t_end_s", "t_initial", "sample_stride"},
    "sweep": {"family", "total", "thicknesses_um", "materials", "tdps_w", "parallelism"},
    "output": {"dir"},
}
MATERIAL_KEYS = {"k", "k_xx", "k_yy", "k_zz", "density", "cp", "cte"}


@dataclass(frozen=True)
class RunConfig:
    stack: StackSpec = field(default_factory=StackSpec)
    sweep: SweepSpec | None = None
    grid: GridOptions = field(default_factory=GridOptions)
    solver: SolverOptions = field(default_factory=SolverOptions)
    schedule: TransientSchedule = field(default_factory=TransientSchedule)
    material_overrides: dict = field(default_factory=dict)
    output_dir: str = "out"

    def library(self) -> MaterialLibrary:
        return builtin_library().with_overrides(self.material_overrides)


def _from_unit(value, scale):
    return value / scale


def _to_unit(value, scale):
    """Inverse of ``_from_unit`` that survives the float round trip."""
    u = value * scale
    cand = u
    for direction in (math.inf, -math.inf):
        cand = u
        for _ in range(8):
            if cand / scale == value:
                return cand
            cand = math.nextafter(cand, direction)
    return u


def _section(data, key, path=""):
    value = data.get(key, {})
    if not isinstance(value, dict):
        raise ConfigError(f"{path}{key} must be an object", key=f"{path}{key}")
    return value


def _check_keys(obj, allowed, path):
    for key in obj:
        if key not in allowed:
            raise ConfigError(f"unknown key {path}{key!r}", key=f"{path}{key}")


def _num(obj, key, path, default=None, kind=float):
    if key not in obj:
        return default
    value = obj[key]
    if value is None:
        return None
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"{path}{key} must be a number, got {value!r}", key=f"{path}{key}")
    if kind is int:
        if int(value) != value:
            raise ConfigError(f"{path}{key} must be an integer", key=f"{path}{key}")
        return int(value)
    return float(value)


def _pair(obj, key, path, default):
    if key not in obj:
        return default
    value = obj[key]
    if (not isinstance(value, list) or len(value) != 2
            or not all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in value)):
        raise ConfigError(f"{path}{key} must be a [x, y] pair of numbers", key=f"{path}{key}")
    return float(value[0]), float(value[1])


def _str(obj, key, path, default):
    if key not in obj:
        return default
    if not isinstance(obj[key], str):
        raise ConfigError(f"{path}{key} must be a string", key=f"{path}{key}")
    return obj[key]


def _layer(data, name, default: LayerSpec):
    sec = _section(data, name)
    _check_keys(sec, SCHEMA[name], f"{name}.")
    thickness = _num(sec, "thickness_um", f"{name}.")
    return replace(default,
                   material=_str(sec, "material", f"{name}.", default.material),
                   thickness=default.thickness if thickness is None else _from_unit(thickness, UM))


def parse_config(text: str) -> RunConfig:
    """Parse JSON config text; defaults fill every omitted field."""
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"JSON syntax error at line {exc.lineno}, column {exc.colno}: {exc.msg}",
                          line=exc.lineno, column=exc.colno) from None
    if not isinstance(data, dict):
        raise ConfigError("config must be a JSON object")
    _check_keys(data, SCHEMA, "")
    for key, allowed in SCHEMA.items():
        if allowed is not None:
            _check_keys(_section(data, key), allowed, f"{key}.")

    try:
        return _build(data)
    except ConfigError:
        raise
    except (ValueError, KeyError) as exc:
        raise ConfigError(str(exc)) from None


def _build(data) -> RunConfig:
    d = StackSpec()
    fx, fy = _pair(data, "footprint_mm", "", (_to_unit(d.footprint_x, MM), _to_unit(d.footprint_y, MM)))

    hbm_sec = _section(data, "hbm")
    total = _num(hbm_sec, "total", "hbm.", d.hbm.total_dies, int)
    per_layer = _num(hbm_sec, "per_layer", "hbm.", d.hbm.dies_per_layer, int)
    if total < 1 or per_layer < 1 or total % per_layer:
        raise ConfigError(f"hbm.per_layer={per_layer} must be a positive divisor of hbm.total={total}",
                          key="hbm.per_layer")
    die = _pair(hbm_sec, "die_mm", "hbm.", None)
    gap = _num(hbm_sec, "gap_mm", "hbm.")
    hbm = HbmDistribution(
        total_dies=total, dies_per_layer=per_layer,
        die_x=d.hbm.die_x if die is None else _from_unit(die[0], MM),
        die_y=d.hbm.die_y if die is None else _from_unit(die[1], MM),
        gap=d.hbm.gap if gap is None else _from_unit(gap, MM))

    inter = _section(data, "interposer")
    gpu = _section(data, "gpu")
    if "tdp_w" in gpu and "power_density_w_cm2" in gpu:
        raise ConfigError("give only one of gpu.tdp_w and gpu.power_density_w_cm2", key="gpu.tdp_w")
    gpu_die = _pair(gpu, "die_mm", "gpu.", None)
    bnd = _section(data, "boundary")

    def um(sec, key, path, default):
        v = _num(sec, key, path)
        return default if v is None else _from_unit(v, UM)

    kwargs = dict(
        footprint_x=_from_unit(fx, MM), footprint_y=_from_unit(fy, MM), hbm=hbm,
        hbm_thickness=um(hbm_sec, "thickness_um", "hbm.", d.hbm_thickness),
        hbm_material=_str(hbm_sec, "material", "hbm.", d.hbm_material),
        hbm_tsv_fraction=_num(hbm_sec, "tsv_fraction", "hbm.", d.hbm_tsv_fraction),
        hbm_power_per_die_w=_num(hbm_sec, "power_w", "hbm.", d.hbm_power_per_die_w),
        interposer_material=_str(inter, "material", "interposer.", d.interposer_material),
        interposer_thickness=um(inter, "thickness_um", "interposer.", d.interposer_thickness),
        interposer_tsv_fraction=_num(inter, "tsv_fraction", "interposer.", d.interposer_tsv_fraction),
        gpu_x=d.gpu_x if gpu_die is None else _from_unit(gpu_die[0], MM),
        gpu_y=d.gpu_y if gpu_die is None else _from_unit(gpu_die[1], MM),
        gpu_thickness=um(gpu, "thickness_um", "gpu.", d.gpu_thickness),
        gpu_material=_str(gpu, "material", "gpu.", d.gpu_material),
        gpu_power_w=_num(gpu, "tdp_w", "gpu."),
        gpu_power_density=_num(gpu, "power_density_w_cm2", "gpu."),
        substrate=_layer(data, "substrate", d.substrate),
        tim=_layer(data, "tim", d.tim),
        heat_sink=_layer(data, "heat_sink", d.heat_sink),
        fill_material=_str(data, "fill_material", "", d.fill_material),
        via_material=_str(data, "via_material", "", d.via_material),
        h_top=_num(bnd, "h_top", "boundary.", d.h_top),
        h_bottom=_num(bnd, "h_bottom", "boundary.", d.h_bottom),
        t_ambient=_num(bnd, "t_ambient", "boundary.", d.t_ambient),
    )
    stack = StackSpec(**kwargs)

    overrides = _material_overrides(data.get("materials", {}))
    library = builtin_library().with_overrides(overrides)

    g = _section(data, "grid")
    cell = _num(g, "cell_um", "grid.")
    max_dz = _num(g, "max_dz_um", "grid.")
    grid = GridOptions(target_cell=GridOptions.target_cell if cell is None else _from_unit(cell, UM),
                       cells_per_layer=_num(g, "cells_per_layer", "grid.", GridOptions.cells_per_layer, int),
                       max_dz=None if max_dz is None else _from_unit(max_dz, UM))
    if not grid.target_cell > 0 or grid.cells_per_layer < 1:
        raise ConfigError("grid.cell_um must be > 0 and grid.cells_per_layer >= 1", key="grid")

    s = _section(data, "solver")
    solver = SolverOptions(rel_tol=_num(s, "rel_tol", "solver.", SolverOptions.rel_tol),
                           max_iters=_num(s, "max_iters", "solver.", None, int),
                           preconditioner=_str(s, "preconditioner", "solver.", SolverOptions.preconditioner))

    t = _section(data, "transient")
    schedule = TransientSchedule(dt=_num(t, "dt_s", "transient.", TransientSchedule.dt),
                                 t_end=_num(t, "t_end_s", "transient.", TransientSchedule.t_end),
                                 t_initial=_num(t, "t_initial", "transient."),
                                 sample_stride=_num(t, "sample_stride", "transient.",
                                                    TransientSchedule.sample_stride, int))

    sweep = None
    if "sweep" in data:
        sw = _section(data, "sweep")
        family = _str(sw, "family", "sweep.", "hbm_distribution")
        thick = sw.get("thicknesses_um")
        mats = sw.get("materials")
        tdps = sw.get("tdps_w")
        d_sw = SweepSpec()
        for key, val in (("thicknesses_um", thick), ("tdps_w", tdps)):
            if val is not None and (not isinstance(val, list) or not all(
                    isinstance(v, (int, float)) and not isinstance(v, bool) for v in val)):
                raise ConfigError(f"sweep.{key} must be a list of numbers", key=f"sweep.{key}")
        if mats is not None and (not isinstance(mats, list) or not all(isinstance(m, str) for m in mats)):
            raise ConfigError("sweep.materials must be a list of names", key="sweep.materials")
        try:
            sweep = SweepSpec(
                base=stack, family=family,
                total=_num(sw, "total", "sweep.", stack.hbm.total_dies, int),
                thicknesses=d_sw.thicknesses if thick is None else tuple(_from_unit(float(v), UM) for v in thick),
                materials=d_sw.materials if mats is None else tuple(mats),
                tdps=d_sw.tdps if tdps is None else tuple(float(v) for v in tdps),
                parallelism=_num(sw, "parallelism", "sweep.", 1, int),
                grid=grid, solver=solver, schedule=schedule,
                material_overrides=tuple((n, tuple(sorted(f.items()))) for n, f in sorted(overrides.items())))
        except ValueError as exc:
            raise ConfigError(str(exc), key="sweep") from None

    names = {stack.hbm_material: "hbm.material", stack.interposer_material: "interposer.material",
             stack.gpu_material: "gpu.material", stack.substrate.material: "substrate.material",
             stack.tim.material: "tim.material", stack.heat_sink.material: "heat_sink.material",
             stack.fill_material: "fill_material", stack.via_material: "via_material"}
    if sweep is not None and sweep.family == "tdp_transient":
        names.update({m: "sweep.materials" for m in sweep.materials})
    for name, key in names.items():
        if name not in library:
            raise ConfigError(f"{key} refers to unknown material {name!r}", key=key)

    out = _section(data, "output")
    _check_keys(out, SCHEMA["output"], "output.")
    return RunConfig(stack=stack, sweep=sweep, grid=grid, solver=solver, schedule=schedule,
                     material_overrides=overrides, output_dir=_str(out, "dir", "output.", "out"))


def _material_overrides(section) -> dict:
    if not isinstance(section, dict):
        raise ConfigError("materials must be an object", key="materials")
    base = builtin_library()
    out = {}
    for name, fields in section.items():
        path = f"materials.{name}."
        if not isinstance(fields, dict):
            raise ConfigError(f"materials.{name} must be an object", key=f"materials.{name}")
        _check_keys(fields, MATERIAL_KEYS, path)
        values = {k: _num(fields, k, path) for k in fields}
        if "k" in values and {"k_xx", "k_yy", "k_zz"} & set(values):
            raise ConfigError(f"{path}k conflicts with per-axis conductivities", key=f"{path}k")
        if "k" in values:
            k = values.pop("k")
            values.update(k_xx=k, k_yy=k, k_zz=k)
        if name not in base:
            missing = {"k_xx", "k_yy", "k_zz", "density", "cp"} - set(values)
            if missing:
                raise ConfigError(f"new material {name!r} is missing {sorted(missing)}",
                                  key=f"materials.{name}")
        for k, v in values.items():
            if k != "cte" and not v > 0:
                raise ConfigError(f"{path}{k} must be > 0", key=f"{path}{k}")
        out[name] = values
    return out


def config_to_dict(cfg: RunConfig) -> dict:
    s = cfg.stack

    def um(v):
        return _to_unit(v, UM)

    def mm(v):
        return _to_unit(v, MM)

    gpu = {"die_mm": [mm(s.gpu_x), mm(s.gpu_y)], "thickness_um": um(s.gpu_thickness), "material": s.gpu_material}
    if s.gpu_power_w is not None:
        gpu["tdp_w"] = s.gpu_power_w
    else:
        gpu["power_density_w_cm2"] = s.gpu_power_density
    data = {
        "footprint_mm": [mm(s.footprint_x), mm(s.footprint_y)],
        "substrate": {"material": s.substrate.material, "thickness_um": um(s.substrate.thickness)},
        "hbm": {"total": s.hbm.total_dies, "per_layer": s.hbm.dies_per_layer,
                "die_mm": [mm(s.hbm.die_x), mm(s.hbm.die_y)], "gap_mm": mm(s.hbm.gap),
                "thickness_um": um(s.hbm_thickness), "material": s.hbm_material,
                "tsv_fraction": s.hbm_tsv_fraction, "power_w": s.hbm_power_per_die_w},
        "interposer": {"material": s.interposer_material, "thickness_um": um(s.interposer_thickness),
                       "tsv_fraction": s.interposer_tsv_fraction},
        "gpu": gpu,
        "tim": {"material": s.tim.material, "thickness_um": um(s.tim.thickness)},
        "heat_sink": {"material": s.heat_sink.material, "thickness_um": um(s.heat_sink.thickness)},
        "fill_material": s.fill_material,
        "via_material": s.via_material,
        "boundary": {"h_top": s.h_top, "h_bottom": s.h_bottom, "t_ambient": s.t_ambient},
        "materials": {name: dict(fields) for name, fields in cfg.material_overrides.items()},
        "grid": {"cell_um": um(cfg.grid.target_cell), "cells_per_layer": cfg.grid.cells_per_layer,
                 "max_dz_um": None if cfg.grid.max_dz is None else um(cfg.grid.max_dz)},
        "solver": {"rel_tol": cfg.solver.rel_tol, "max_iters": cfg.solver.max_iters,
                   "preconditioner": cfg.solver.preconditioner},
        "transient": {"dt_s": cfg.schedule.dt, "t_end_s": cfg.schedule.t_end,
                      "t_initial": cfg.schedule.t_initial, "sample_stride": cfg.schedule.sample_stride},
        "output": {"dir": cfg.output_dir},
    }
    if cfg.sweep is not None:
        sw = cfg.sweep
        data["sweep"] = {"family": sw.family, "total": sw.total,
                         "thicknesses_um": [um(t) for t in sw.thicknesses],
                         "materials": list(sw.materials), "tdps_w": list(sw.tdps),
                         "parallelism": sw.parallelism}
    return data


def emit_config(cfg: RunConfig) -> str:
    return json.dumps(config_to_dict(cfg), indent=2) + "\n"
