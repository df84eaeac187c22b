"""Solver-versus-oracle checks, shared by the ``verify`` command and the tests."""

from __future__ import annotations

import time
from dataclasses import dataclass

import numpy as np

from .fvm import assemble_system
from .materials import Material
from .oracle import SlabProblem, convergence_order, manufactured_solution, slab_analytic
from .solve import SolverOptions, TransientSchedule, run_transient, solve_steady
from .stack import VoxelModel


@dataclass
class Check:
    name: str
    passed: bool
    value: float
    limit: float
    seconds: float = 0.0

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return f"{status}  {self.name}: {self.value:.6g} (limit {self.limit:.6g}, {self.seconds:.2f} s)"


def slab_model(p: SlabProblem, n_cells: int = 40, side: float = 1e-3) -> VoxelModel:
    mat = Material.isotropic("slab", p.k, density=1000.0, cp=1000.0)
    return VoxelModel.homogeneous([0.0, side], [0.0, side], np.linspace(0.0, p.thickness, n_cells + 1),
                                  mat, p.q, h_top=p.h_top, h_bottom=p.h_bottom, t_ambient=p.t_e)


def slab_error(p: SlabProblem, n_cells: int = 40) -> float:
    """Max relative error in T - T_e of the solver against the analytic slab profile."""
    model = slab_model(p, n_cells)
    field = solve_steady(model)
    numeric = field.values[:, 0, 0] - p.t_e
    exact = slab_analytic(p, model.centers(2)) - p.t_e
    return float(np.max(np.abs(numeric - exact)) / np.max(np.abs(exact)))


def mms_solve(n: int, length: float = 1e-3, k: float = 140.0, h: float = 1e4,
              opts: SolverOptions | None = None):
    """Solve the n^3 manufactured problem; returns (system, field, exact)."""
    edges = np.linspace(0.0, length, n + 1)
    mp = manufactured_solution(edges, edges, edges, k, h)
    mat = Material.isotropic("mms", k, density=1000.0, cp=1000.0)
    model = VoxelModel.homogeneous(edges, edges, edges, mat, mp.source, h_top=h, h_bottom=h,
                                   t_ambient=300.0)
    system = assemble_system(model, ambient_top=mp.ambient_top, ambient_bottom=mp.ambient_bottom)
    injected = np.zeros(model.shape)
    injected[:, :, 0] += mp.side_flux_in["x_low"]
    injected[:, :, -1] += mp.side_flux_in["x_high"]
    injected[:, 0, :] += mp.side_flux_in["y_low"]
    injected[:, -1, :] += mp.side_flux_in["y_high"]
    system = system.with_source(system.source + injected.ravel())
    field = solve_steady(system, opts or SolverOptions(rel_tol=1e-11))
    return system, field, mp.t_exact


def mms_error(n: int, length: float = 1e-3, k: float = 140.0, h: float = 1e4,
              opts: SolverOptions | None = None) -> float:
    """Max-norm error of the solver on an n^3 manufactured problem."""
    _, field, exact = mms_solve(n, length, k, h, opts)
    return float(np.max(np.abs(field.values - exact)))


def mms_convergence(sizes=(20, 40, 80), length: float = 1e-3):
    errors = [mms_error(n, length) for n in sizes]
    spacings = [length / n for n in sizes]
    return errors, convergence_order(errors, spacings)


def lumped_error(capacity: float = 2.0, conductance: float = 0.5, power: float = 3.0,
                 steps_per_tau: int = 50, n_tau: float = 5.0) -> float:
    """Max |T_num - T_exact| / (P/U) for a single cell charging through its films."""
    side = 1e-2
    h = conductance / (2 * side * side)  # split between top and bottom films
    # very conductive cell so the half-cell resistance is negligible next to the film
    k = 1e12
    volume = side ** 3
    mat = Material.isotropic("lump", k, density=1.0, cp=capacity / volume)
    model = VoxelModel.homogeneous([0, side], [0, side], [0, side], mat, power / volume,
                                   h_top=h, h_bottom=h, t_ambient=300.0)
    tau = capacity / conductance
    dt = tau / steps_per_tau
    sched = TransientSchedule(dt=dt, t_end=n_tau * tau, sample_stride=1)
    result = run_transient(model, sched, SolverOptions(rel_tol=1e-13))
    exact = 300.0 + (power / conductance) * (1 - np.exp(-result.times / tau))
    return float(np.max(np.abs(result.gpu_max - exact)) / (power / conductance))


def run_all(include_mms: bool = True) -> list[Check]:
    checks = []
    for hb, ht in ((10.0, 350.0), (150.0, 150.0), (10.0, 10.0), (350.0, 250.0)):
        t0 = time.perf_counter()
        err = slab_error(SlabProblem(1e-3, 140.0, 2e9, ht, hb, 298.15))
        checks.append(Check(f"slab h_b={hb:g} h_t={ht:g} rel err", err < 5e-3, err, 5e-3,
                            time.perf_counter() - t0))
    t0 = time.perf_counter()
    err = lumped_error()
    checks.append(Check("lumped capacitance backward Euler", err < 1e-2, err, 1e-2, time.perf_counter() - t0))
    if include_mms:
        t0 = time.perf_counter()
        _, order = mms_convergence()
        checks.append(Check("MMS observed order 20^3/40^3/80^3", order >= 1.9, order, 1.9,
                            time.perf_counter() - t0))
    return checks


def format_table(checks) -> str:
    return "\n".join(c.line() for c in checks)


def energy_imbalance(system, field) -> float:
    """|sum of sources - heat leaving through the films| / sum of sources."""
    total = float(system.source.sum())
    if total == 0:
        return 0.0
    return abs(total - system.boundary_heat(field.values)) / abs(total)
