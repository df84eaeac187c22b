"""Steady and transient solution of the assembled conduction system."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

from .errors import SolverError, ValidationError
from .fvm import LinearSystem, assemble_system
from .stack import VoxelModel

PRECONDITIONERS = ("none", "jacobi", "zline")


@dataclass(frozen=True)
class SolverOptions:
    rel_tol: float = 1e-8
    max_iters: int | None = None  # default max(10000, 20*sqrt(n))
    preconditioner: str = "jacobi"

    def __post_init__(self):
        if not self.rel_tol > 0:
            raise ValidationError("rel_tol must be > 0")
        if self.max_iters is not None and self.max_iters < 1:
            raise ValidationError("max_iters must be >= 1")
        if self.preconditioner not in PRECONDITIONERS:
            raise ValidationError(f"preconditioner must be one of {PRECONDITIONERS}")

    def iteration_limit(self, n: int) -> int:
        if self.max_iters is not None:
            return self.max_iters
        return max(10000, int(20 * math.sqrt(n)))


@dataclass(frozen=True)
class TransientSchedule:
    dt: float = 0.05
    t_end: float = 30.0
    t_initial: float | None = None  # K, default ambient
    sample_stride: int = 20

    def __post_init__(self):
        if not self.dt > 0:
            raise ValidationError("dt must be > 0")
        if not self.t_end >= self.dt:
            raise ValidationError("t_end must be >= dt")
        if self.sample_stride < 1:
            raise ValidationError("sample_stride must be >= 1")

    @property
    def n_steps(self) -> int:
        return int(round(self.t_end / self.dt))


@dataclass(frozen=True, eq=False)
class TemperatureField:
    values: np.ndarray  # K, shape (nz, ny, nx)
    t_ambient: float
    iterations: int = 0
    residual: float = 0.0

    @property
    def shape(self):
        return self.values.shape

    @property
    def t_max(self) -> float:
        return float(self.values.max())

    def ravel(self) -> np.ndarray:
        return self.values.ravel()


@dataclass
class CGResult:
    x: np.ndarray
    iterations: int
    residual: float
    residual_history: list = field(default_factory=list)


def _dot(a, b):
    # pairwise summation: fixed reduction order, no threaded BLAS
    return float(np.add.reduce(a * b))


class ZLinePreconditioner:
    """Block Jacobi with one tridiagonal block per (x, y) column.

    Thin layers couple cells far more strongly along z than in-plane; solving
    each column exactly removes that stiffness from the CG iteration.
    """

    def __init__(self, diag, z_coupling):
        nz = diag.shape[0]
        self.nz = nz
        self.off = -z_coupling  # sub/super diagonal, (nz-1, ny, nx)
        self.cprime = np.empty_like(z_coupling)
        self.denom = np.empty_like(diag)
        self.denom[0] = diag[0]
        for k in range(1, nz):
            self.cprime[k - 1] = self.off[k - 1] / self.denom[k - 1]
            self.denom[k] = diag[k] - self.off[k - 1] * self.cprime[k - 1]
        self.inv_denom = 1.0 / self.denom

    def __call__(self, r):
        d = r.reshape(self.denom.shape).copy()
        d[0] *= self.inv_denom[0]
        for k in range(1, self.nz):
            d[k] = (d[k] - self.off[k - 1] * d[k - 1]) * self.inv_denom[k]
        for k in range(self.nz - 2, -1, -1):
            d[k] -= self.cprime[k] * d[k + 1]
        return d.ravel()


def make_preconditioner(kind, matrix, diag=None, z_coupling=None, shape=None):
    if kind == "none":
        return lambda r: r
    if diag is None:
        diag = matrix.diagonal()
    if kind == "jacobi":
        inv = 1.0 / diag
        return lambda r: inv * r
    if kind == "zline":
        if z_coupling is None or shape is None:
            raise ValidationError("zline preconditioner needs the grid structure of a LinearSystem")
        return ZLinePreconditioner(diag.reshape(shape), z_coupling)
    raise ValidationError(f"unknown preconditioner {kind!r}")


def cg_solve(matrix, rhs, x0=None, opts: SolverOptions | None = None, preconditioner=None) -> CGResult:
    """Preconditioned conjugate gradients for an SPD ``matrix``.

    Stops when the true residual satisfies ``|b - A x| <= rel_tol * |b|``.
    ``preconditioner`` is a callable applying M^-1; by default it is built
    from ``opts.preconditioner`` (``zline`` needs :func:`solve_linear_system`).
    """
    opts = opts or SolverOptions()
    A = sp.csr_matrix(matrix) if not sp.issparse(matrix) else matrix
    b = np.asarray(rhs, dtype=float).ravel()
    n = b.size
    precond = preconditioner or make_preconditioner(opts.preconditioner, A)
    x = np.zeros(n) if x0 is None else np.array(x0, dtype=float).ravel()
    b_norm = math.sqrt(_dot(b, b))
    if b_norm == 0.0:
        return CGResult(np.zeros(n), 0, 0.0, [0.0])
    tol = opts.rel_tol * b_norm
    limit = opts.iteration_limit(n)

    r = b - A @ x
    res = math.sqrt(_dot(r, r))
    history = [res / b_norm]
    if res <= tol:
        return CGResult(x, 0, res / b_norm, history)
    z = precond(r)
    p = z.copy()
    rz = _dot(r, z)
    it = 0
    while it < limit:
        it += 1
        Ap = A @ p
        pAp = _dot(p, Ap)
        if pAp <= 0:
            raise SolverError("matrix is not positive definite along a search direction", history)
        alpha = rz / pAp
        x += alpha * p
        r -= alpha * Ap
        res = math.sqrt(_dot(r, r))
        if res <= tol:
            r = b - A @ x
            res = math.sqrt(_dot(r, r))
            history.append(res / b_norm)
            if res <= tol:
                return CGResult(x, it, res / b_norm, history)
            # recurrence drifted from the true residual: restart from it
            z = precond(r)
            p = z.copy()
            rz = _dot(r, z)
            continue
        history.append(res / b_norm)
        z = precond(r)
        rz_new = _dot(r, z)
        p = z + (rz_new / rz) * p
        rz = rz_new
    raise SolverError(f"CG did not converge in {limit} iterations (relative residual "
                      f"{history[-1]:.3e} > {opts.rel_tol:g})", history)


def solve_linear_system(system: LinearSystem, opts: SolverOptions | None = None, x0=None,
                        extra_diag=None, rhs=None) -> CGResult:
    """CG on ``(A + diag(extra_diag)) theta = rhs`` for the excess temperature."""
    opts = opts or SolverOptions()
    matrix = system.matrix
    diag = system.diag
    if extra_diag is not None:
        matrix = matrix + sp.diags(extra_diag, format="csr")
        diag = diag + extra_diag
    precond = make_preconditioner(opts.preconditioner, matrix, diag=diag,
                                  z_coupling=system.z_coupling, shape=system.shape)
    b = system.shifted_rhs if rhs is None else rhs
    return cg_solve(matrix, b, x0=x0, opts=opts, preconditioner=precond)


def solve_steady(system: LinearSystem | VoxelModel, opts: SolverOptions | None = None) -> TemperatureField:
    """Steady temperature field, K.

    Solves for T - T_ambient so the relative tolerance applies to the heat
    sources rather than to the (large) ambient film terms.
    """
    if isinstance(system, VoxelModel):
        system = assemble_system(system)
    result = solve_linear_system(system, opts)
    values = (result.x + system.t_ambient).reshape(system.shape)
    return TemperatureField(values, system.t_ambient, result.iterations, result.residual)


@dataclass(frozen=True, eq=False)
class TransientResult:
    times: np.ndarray  # s, one entry per step including t=0
    gpu_max: np.ndarray  # K, max over the GPU die cells at each time
    sample_times: np.ndarray
    samples: list  # TemperatureField at sample_times
    final: TemperatureField
    iterations: int

    def time_to_fraction(self, fraction: float, steady_max: float) -> float:
        """First time the GPU maximum reaches ``fraction`` of the steady rise."""
        rise0 = self.gpu_max[0]
        target = rise0 + fraction * (steady_max - rise0)
        hit = np.nonzero(self.gpu_max >= target)[0]
        return float(self.times[hit[0]]) if hit.size else math.inf


def run_transient(model: VoxelModel, schedule: TransientSchedule | None = None,
                  opts: SolverOptions | None = None, system: LinearSystem | None = None) -> TransientResult:
    """Backward-Euler time integration from a uniform initial temperature.

    Each step solves ``(C/dt + A) T1 = C/dt T0 + b`` with ``C = rho cp V``.
    """
    schedule = schedule or TransientSchedule()
    opts = opts or SolverOptions()
    system = system or assemble_system(model)
    capacity = model.heat_capacity().ravel()
    if np.any(capacity <= 0):
        raise ValidationError("every cell needs positive rho*cp")
    c_dt = capacity / schedule.dt
    t0 = model.t_ambient if schedule.t_initial is None else schedule.t_initial
    theta = np.full(model.n_cells, t0 - system.t_ambient)

    mask = model.gpu_mask().ravel()
    if not mask.any():
        mask = np.ones(model.n_cells, dtype=bool)

    matrix = system.matrix + sp.diags(c_dt, format="csr")
    precond = make_preconditioner(opts.preconditioner, matrix, diag=system.diag + c_dt,
                                  z_coupling=system.z_coupling, shape=system.shape)
    source = system.shifted_rhs
    n_steps = schedule.n_steps
    times = schedule.dt * np.arange(n_steps + 1)
    gpu_max = np.empty(n_steps + 1)
    gpu_max[0] = theta[mask].max() + system.t_ambient
    sample_times, samples = [0.0], [TemperatureField((theta + system.t_ambient).reshape(system.shape),
                                                      system.t_ambient)]
    total_iters = 0
    previous = theta
    for step in range(1, n_steps + 1):
        guess = 2.0 * theta - previous  # linear extrapolation of the last two steps
        result = cg_solve(matrix, c_dt * theta + source, x0=guess, opts=opts, preconditioner=precond)
        previous, theta = theta, result.x
        total_iters += result.iterations
        gpu_max[step] = theta[mask].max() + system.t_ambient
        if step % schedule.sample_stride == 0 or step == n_steps:
            sample_times.append(times[step])
            samples.append(TemperatureField((theta + system.t_ambient).reshape(system.shape),
                                            system.t_ambient, result.iterations, result.residual))
    return TransientResult(times, gpu_max, np.array(sample_times), samples, samples[-1], total_iters)
