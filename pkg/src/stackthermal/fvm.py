"""Cell-centered finite-volume discretization of steady conduction.

Interior faces use the harmonic (series) conductance of the two half cells.
Top and bottom faces carry a convective film in series with the half-cell
conduction resistance; side walls are adiabatic. The result is a symmetric
M-matrix: positive diagonal, non-positive off-diagonals, row sums equal to the
boundary film conductances.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np
import scipy.sparse as sp

from .errors import AssemblyError
from .stack import VoxelModel


def face_conductance(area, d_a, d_b, k_a, k_b):
    """Conductance (W/K) between two cell centers through a shared face.

    ``d_a``/``d_b`` are center-to-face distances, ``k_a``/``k_b`` the
    conductivities along the face normal.
    """
    return area / (d_a / k_a + d_b / k_b)


def robin_face_coefficient(h, k_n, half_thickness, area):
    """Film plus half-cell conductance (W/K) from a cell center to ambient."""
    return area / (1.0 / h + half_thickness / k_n)


@dataclass(frozen=True, eq=False)
class LinearSystem:
    """``matrix @ T = rhs`` with ``rhs = source + U_b * T_e``.

    ``ambient_excess`` holds sum(U_face * (T_face_ambient - t_ambient)) per cell,
    nonzero only when face-wise ambient data replaces the scalar ambient.
    """

    matrix: sp.csr_matrix
    source: np.ndarray  # W per cell
    boundary_conductance: np.ndarray  # W/K per cell, top + bottom films
    t_ambient: float
    shape: tuple
    diag: np.ndarray
    z_coupling: np.ndarray  # (nz-1, ny, nx) conductance between k and k+1
    top_conductance: np.ndarray  # (ny, nx)
    bottom_conductance: np.ndarray  # (ny, nx)
    ambient_excess: np.ndarray | None = None

    @property
    def n(self) -> int:
        return self.matrix.shape[0]

    @property
    def rhs(self) -> np.ndarray:
        return self.shifted_rhs + self.boundary_conductance * self.t_ambient

    @property
    def shifted_rhs(self) -> np.ndarray:
        """Right-hand side for the excess temperature T - t_ambient."""
        if self.ambient_excess is None:
            return self.source
        return self.source + self.ambient_excess

    def with_source(self, source) -> LinearSystem:
        return replace(self, source=np.asarray(source, dtype=float).ravel())

    def boundary_heat(self, temperature) -> float:
        """Heat leaving through the films, W."""
        theta = np.asarray(temperature).ravel() - self.t_ambient
        out = self.boundary_conductance * theta
        if self.ambient_excess is not None:
            out = out - self.ambient_excess
        return float(out.sum())


def assemble_system(model: VoxelModel, ambient_top=None, ambient_bottom=None) -> LinearSystem:
    """Build the 7-point conduction system for ``model``.

    ``ambient_top``/``ambient_bottom`` optionally give a per-column ambient
    (shape (ny, nx)) for the top and bottom films; by default the model's scalar
    ambient is used.
    """
    nz, ny, nx = model.shape
    n = model.n_cells
    kx, ky, kz = (model.conductivity(a) for a in range(3))
    if min(kx.min(), ky.min(), kz.min()) <= 0:
        raise AssemblyError("cell with non-positive conductivity")
    dx, dy, dz = model.dx, model.dy, model.dz
    idx = np.arange(n).reshape(model.shape)

    rows, cols, vals = [], [], []

    def couple(a, b, u):
        rows.append(a.ravel())
        cols.append(b.ravel())
        vals.append(u.ravel())

    if nx > 1:
        area = (dz[:, None] * dy[None, :])[:, :, None]
        u = face_conductance(area, dx[:-1] / 2, dx[1:] / 2, kx[:, :, :-1], kx[:, :, 1:])
        couple(idx[:, :, :-1], idx[:, :, 1:], u)
    if ny > 1:
        area = (dz[:, None] * dx[None, :])[:, None, :]
        u = face_conductance(area, dy[:-1, None] / 2, dy[1:, None] / 2, ky[:, :-1, :], ky[:, 1:, :])
        couple(idx[:, :-1, :], idx[:, 1:, :], u)
    z_coupling = np.zeros((max(nz - 1, 0), ny, nx))
    if nz > 1:
        area = model.cell_area[None, :, :]
        z_coupling = face_conductance(area, dz[:-1, None, None] / 2, dz[1:, None, None] / 2,
                                      kz[:-1], kz[1:])
        couple(idx[:-1], idx[1:], z_coupling)

    a_idx = np.concatenate(rows) if rows else np.empty(0, dtype=int)
    b_idx = np.concatenate(cols) if cols else np.empty(0, dtype=int)
    u_all = np.concatenate(vals) if vals else np.empty(0)

    top = robin_face_coefficient(model.h_top, kz[-1], dz[-1] / 2, model.cell_area)
    bottom = robin_face_coefficient(model.h_bottom, kz[0], dz[0] / 2, model.cell_area)
    boundary = np.zeros(model.shape)
    boundary[-1] += top
    boundary[0] += bottom
    boundary = boundary.ravel()

    diag = boundary + np.bincount(a_idx, u_all, minlength=n) + np.bincount(b_idx, u_all, minlength=n)
    matrix = sp.coo_matrix(
        (np.concatenate([-u_all, -u_all, diag]),
         (np.concatenate([a_idx, b_idx, np.arange(n)]), np.concatenate([b_idx, a_idx, np.arange(n)]))),
        shape=(n, n)).tocsr()
    matrix.sort_indices()

    excess = None
    if ambient_top is not None or ambient_bottom is not None:
        excess = np.zeros(model.shape)
        if ambient_top is not None:
            excess[-1] += top * (np.asarray(ambient_top) - model.t_ambient)
        if ambient_bottom is not None:
            excess[0] += bottom * (np.asarray(ambient_bottom) - model.t_ambient)
        excess = excess.ravel()

    source = (model.power_density * model.cell_volume).ravel()
    return LinearSystem(matrix=matrix, source=source, boundary_conductance=boundary,
                        t_ambient=model.t_ambient, shape=model.shape, diag=diag,
                        z_coupling=z_coupling, top_conductance=top, bottom_conductance=bottom,
                        ambient_excess=excess)
