"""Experiment families and the sweep runner."""

from __future__ import annotations

import logging
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from .analysis import gpu_metrics
from .fvm import assemble_system
from .materials import MaterialLibrary, builtin_library
from .solve import SolverOptions, TransientSchedule, run_transient, solve_steady
from .stack import StackSpec, voxelize

log = logging.getLogger(__name__)

FAMILIES = ("hbm_distribution", "interposer_thickness", "tdp_transient")
DEFAULT_THICKNESSES_UM = (50, 100, 150, 200, 250, 300, 400, 500)
DEFAULT_TDPS_W = (100.0, 200.0, 300.0)
DEFAULT_MATERIALS = ("silicon", "hbn")


def fig2_family(total: int = 20) -> list[tuple[int, int]]:
    """Every (dies_per_layer, n_layers) factor pair of ``total``, dies/layer descending."""
    if total < 1:
        raise ValueError("total must be >= 1")
    return [(d, total // d) for d in range(total, 0, -1) if total % d == 0]


def thickness_family(values) -> list[float]:
    values = [float(v) for v in values]
    if not values:
        raise ValueError("thickness list is empty")
    if any(v <= 0 for v in values):
        raise ValueError("thicknesses must be > 0")
    return values


def tdp_transient_family(materials=DEFAULT_MATERIALS, tdps=DEFAULT_TDPS_W) -> list[tuple[str, float]]:
    materials, tdps = list(materials), list(tdps)
    if not materials or not tdps:
        raise ValueError("materials and tdps must be non-empty")
    return [(m, float(p)) for m in materials for p in tdps]


@dataclass(frozen=True)
class GridOptions:
    target_cell: float = 0.25e-3
    cells_per_layer: int = 2
    max_dz: float | None = None


@dataclass(frozen=True)
class SweepSpec:
    base: StackSpec = field(default_factory=StackSpec)
    family: str = "hbm_distribution"
    total: int = 20
    thicknesses: tuple = tuple(t * 1e-6 for t in DEFAULT_THICKNESSES_UM)  # m
    materials: tuple = DEFAULT_MATERIALS
    tdps: tuple = DEFAULT_TDPS_W
    parallelism: int = 1
    grid: GridOptions = field(default_factory=GridOptions)
    solver: SolverOptions = field(default_factory=SolverOptions)
    schedule: TransientSchedule = field(default_factory=TransientSchedule)
    material_overrides: tuple = ()  # ((name, ((field, value), ...)), ...)

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ValueError(f"unknown family {self.family!r}; expected one of {FAMILIES}")
        if self.parallelism < 1:
            raise ValueError("parallelism must be >= 1")

    def library(self) -> MaterialLibrary:
        lib = builtin_library()
        if self.material_overrides:
            lib = lib.with_overrides({name: dict(fields) for name, fields in self.material_overrides})
        return lib


@dataclass(frozen=True)
class SweepCase:
    label: str
    spec: StackSpec
    transient: bool = False


def generate_cases(sweep: SweepSpec) -> list[SweepCase]:
    base = sweep.base
    if sweep.family == "hbm_distribution":
        hbm = base.hbm
        return [SweepCase(f"hbm_{d}x{n}", replace(base, hbm=replace(hbm, total_dies=sweep.total,
                                                                         dies_per_layer=d)))
                for d, n in fig2_family(sweep.total)]
    if sweep.family == "interposer_thickness":
        return [SweepCase(f"thk_{t * 1e6:g}um", replace(base, interposer_thickness=t))
                for t in thickness_family(sweep.thicknesses)]
    return [SweepCase(f"{m}_{p:g}W", replace(base.with_tdp(p), interposer_material=m), transient=True)
            for m, p in tdp_transient_family(sweep.materials, sweep.tdps)]


@dataclass
class CaseResult:
    label: str
    dies_per_layer: int
    n_layers: int
    interposer_material: str
    thickness_um: float
    tdp_w: float
    t_max: float = math.nan
    hotspot_area: float = math.nan  # m^2
    R: float = math.nan
    mean: float = math.nan
    std: float = math.nan
    iterations: int = 0
    wall_ms: float = 0.0
    error: str | None = None
    trace_times: np.ndarray | None = None
    trace_gpu_max: np.ndarray | None = None

    @property
    def ok(self) -> bool:
        return self.error is None


@dataclass
class SweepReport:
    family: str
    rows: list

    @property
    def failed(self) -> list:
        return [r for r in self.rows if not r.ok]

    def column(self, name) -> np.ndarray:
        return np.array([getattr(r, name) for r in self.rows], dtype=float)


def run_case(case: SweepCase, grid: GridOptions = GridOptions(), solver: SolverOptions = SolverOptions(),
             schedule: TransientSchedule = TransientSchedule(),
             library: MaterialLibrary | None = None) -> CaseResult:
    spec = case.spec
    row = CaseResult(case.label, spec.hbm.dies_per_layer, spec.hbm.n_layers, spec.interposer_material,
                     spec.interposer_thickness * 1e6, spec.gpu_total_power)
    t0 = time.perf_counter()
    try:
        model = voxelize(spec, grid.target_cell, grid.cells_per_layer, library=library, max_dz=grid.max_dz)
        system = assemble_system(model)
        if case.transient:
            result = run_transient(model, schedule, solver, system=system)
            field_ = result.final
            row.iterations = result.iterations
            row.trace_times = result.times
            row.trace_gpu_max = result.gpu_max
        else:
            field_ = solve_steady(system, solver)
            row.iterations = field_.iterations
        m = gpu_metrics(field_, model)
        row.t_max, row.hotspot_area, row.R = m["t_max"], m["hotspot_area"], m["R"]
        row.mean, row.std = m["mean"], m["std"]
    except Exception as exc:  # recorded per case; the sweep goes on
        log.warning("case %s failed: %s", case.label, exc)
        row.error = f"{type(exc).__name__}: {exc}"
    row.wall_ms = 1e3 * (time.perf_counter() - t0)
    return row


def _run_indexed(args):
    case, grid, solver, schedule, library = args
    return run_case(case, grid, solver, schedule, library)


def run_sweep(sweep: SweepSpec) -> SweepReport:
    """Run every case; rows come back in generation order whatever the parallelism."""
    cases = generate_cases(sweep)
    library = sweep.library()
    jobs = [(c, sweep.grid, sweep.solver, sweep.schedule, library) for c in cases]
    if sweep.parallelism == 1 or len(cases) == 1:
        rows = [_run_indexed(j) for j in jobs]
    else:
        with ProcessPoolExecutor(max_workers=min(sweep.parallelism, len(cases))) as pool:
            rows = list(pool.map(_run_indexed, jobs))
    return SweepReport(sweep.family, rows)
