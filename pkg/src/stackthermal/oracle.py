"""Analytic reference solutions for verifying the discretization.

Nothing here imports the fvm or solve modules.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class SlabProblem:
    """1D slab, z=0 at the bottom face, uniform generation, convective films on both faces."""

    thickness: float  # m
    k: float  # W/(m K)
    q: float  # W/m^3
    h_top: float
    h_bottom: float
    t_e: float

    def __post_init__(self):
        for name in ("thickness", "k", "h_top", "h_bottom", "t_e"):
            if not getattr(self, name) > 0:
                raise ValueError(f"SlabProblem.{name} must be > 0")
        if self.q < 0:
            raise ValueError("SlabProblem.q must be >= 0")

    def coefficients(self) -> tuple[float, float]:
        """(c1, c0) of theta(z) = -q z^2/(2k) + c1 z + c0.

        Bottom: k theta'(0) = h_b theta(0). Top: -k theta'(L) = h_t theta(L).
        """
        L, k, q, ht, hb = self.thickness, self.k, self.q, self.h_top, self.h_bottom
        lhs = np.array([[k, -hb],
                        [k + ht * L, ht]])
        rhs = np.array([0.0, q * L + ht * q * L * L / (2 * k)])
        c1, c0 = np.linalg.solve(lhs, rhs)
        return float(c1), float(c0)


def slab_analytic(p: SlabProblem, z):
    """Exact temperature (K) at height ``z`` (scalar or array) in the slab."""
    z_arr = np.asarray(z, dtype=float)
    if np.any(z_arr < 0) or np.any(z_arr > p.thickness):
        raise ValueError(f"z outside the slab [0, {p.thickness}]")
    c1, c0 = p.coefficients()
    theta = -p.q * z_arr ** 2 / (2 * p.k) + c1 * z_arr + c0
    out = p.t_e + theta
    return float(out) if out.ndim == 0 else out


@dataclass(frozen=True)
class ManufacturedProblem:
    """Exact field, source and boundary data on a box centered at the origin.

    Cell arrays have shape (nz, ny, nx). ``side_flux_in`` maps a wall name to
    the heat (W) entering each boundary cell through that wall.
    ``ambient_top``/``ambient_bottom`` are per-column ambients that make a film
    of coefficient ``h`` reproduce the exact boundary flux.
    """

    t_exact: np.ndarray
    source: np.ndarray  # W/m^3 at cell centers
    ambient_top: np.ndarray
    ambient_bottom: np.ndarray
    side_flux_in: dict
    k: float
    h: float


MMS_BASE = 300.0
MMS_AMPLITUDE = 10.0


def mms_temperature(x, y, z, lengths):
    """T = 300 + 10 cos(pi x/Lx) cos(pi y/Ly) cos(pi z/Lz), coordinates from the box center."""
    lx, ly, lz = lengths
    return MMS_BASE + MMS_AMPLITUDE * (np.cos(np.pi * x / lx) * np.cos(np.pi * y / ly)
                                       * np.cos(np.pi * z / lz))


def mms_source(x, y, z, lengths, k):
    lx, ly, lz = lengths
    factor = k * np.pi ** 2 * (1 / lx ** 2 + 1 / ly ** 2 + 1 / lz ** 2)
    return factor * (mms_temperature(x, y, z, lengths) - MMS_BASE)


def manufactured_solution(x_edges, y_edges, z_edges, k: float, h: float) -> ManufacturedProblem:
    """Manufactured problem for homogeneous isotropic conductivity ``k``."""
    edges = [np.asarray(e, dtype=float) for e in (x_edges, y_edges, z_edges)]
    lengths = tuple(e[-1] - e[0] for e in edges)
    mids = [0.5 * (e[0] + e[-1]) for e in edges]
    xe, ye, ze = (e - m for e, m in zip(edges, mids))
    xc, yc, zc = (0.5 * (e[1:] + e[:-1]) for e in (xe, ye, ze))
    dx, dy, dz = (np.diff(e) for e in (xe, ye, ze))
    Z, Y, X = np.meshgrid(zc, yc, xc, indexing="ij")
    t_exact = mms_temperature(X, Y, Z, lengths)
    source = mms_source(X, Y, Z, lengths, k)
    lx, ly, lz = lengths
    amp = MMS_AMPLITUDE

    # outward conductive flux (W/m^2) through each wall at face centers
    def cx(x):
        return np.cos(np.pi * x / lx)

    def cy(y):
        return np.cos(np.pi * y / ly)

    def cz(z):
        return np.cos(np.pi * z / lz)

    def sx(x):
        return np.sin(np.pi * x / lx)

    def sy(y):
        return np.sin(np.pi * y / ly)

    def sz(z):
        return np.sin(np.pi * z / lz)

    side = {}
    # x walls: outward flux = -k dT/dx * n_x
    for name, x_wall, sign in (("x_low", xe[0], -1.0), ("x_high", xe[-1], 1.0)):
        dTdx = -amp * math.pi / lx * sx(x_wall) * np.outer(cz(zc), cy(yc))  # (nz, ny)
        out = -k * dTdx * sign
        side[name] = -out * np.outer(dz, dy)
    for name, y_wall, sign in (("y_low", ye[0], -1.0), ("y_high", ye[-1], 1.0)):
        dTdy = -amp * math.pi / ly * sy(y_wall) * np.outer(cz(zc), cx(xc))  # (nz, nx)
        out = -k * dTdy * sign
        side[name] = -out * np.outer(dz, dx)

    ambient = {}
    for name, z_wall, sign in (("bottom", ze[0], -1.0), ("top", ze[-1], 1.0)):
        t_face = MMS_BASE + amp * np.outer(cy(yc), cx(xc)) * cz(z_wall)
        dTdz = -amp * math.pi / lz * sz(z_wall) * np.outer(cy(yc), cx(xc))
        out = -k * dTdz * sign
        # film: out = h (t_face - ambient)
        ambient[name] = t_face - out / h

    return ManufacturedProblem(t_exact, source, ambient["top"], ambient["bottom"], side, k, h)


def convergence_order(errors, spacings) -> float:
    """Least-squares slope of log(error) against log(spacing)."""
    e = np.asarray(errors, dtype=float)
    h = np.asarray(spacings, dtype=float)
    if e.size < 2 or e.size != h.size:
        raise ValueError("need at least two (error, spacing) pairs of equal length")
    if np.any(e <= 0) or np.any(h <= 0):
        raise ValueError("errors and spacings must be positive")
    slope, _ = np.polyfit(np.log(h), np.log(e), 1)
    return float(slope)
