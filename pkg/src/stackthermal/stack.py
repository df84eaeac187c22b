"""Package geometry: layer ordering, HBM placement and voxelization."""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field, replace
from functools import cached_property

import numpy as np

from .errors import GeometryError, RefinementError, ValidationError
from .materials import DEFAULT_TSV_FRACTION, Material, MaterialLibrary, builtin_library, effective_tsv_medium

LAYER_KINDS = ("substrate", "hbm_tier", "interposer", "gpu", "tim", "heat_sink")

H_TOP_BAND = (150.0, 350.0)

# cell region labels
REGION_BULK = 0
REGION_FILL = 1
REGION_GPU = 2
REGION_HBM = 3


@dataclass(frozen=True)
class LayerSpec:
    kind: str
    thickness: float  # m
    material: str
    tsv_fraction: float | None = None

    def __post_init__(self):
        if self.kind not in LAYER_KINDS:
            raise ValidationError(f"unknown layer kind {self.kind!r}; expected one of {LAYER_KINDS}")
        if not self.thickness > 0:
            raise ValidationError(f"{self.kind} layer thickness must be > 0, got {self.thickness}")
        if self.tsv_fraction is not None and not 0.0 <= self.tsv_fraction <= 1.0:
            raise ValidationError(f"{self.kind} tsv_fraction must lie in [0, 1], got {self.tsv_fraction}")


@dataclass(frozen=True)
class HbmDistribution:
    total_dies: int = 20
    dies_per_layer: int = 5
    die_x: float = 3.6e-3
    die_y: float = 4.75e-3
    gap: float = 1.0e-3

    def __post_init__(self):
        if self.total_dies < 1 or self.dies_per_layer < 1:
            raise ValidationError("HBM die counts must be >= 1")
        if self.total_dies % self.dies_per_layer:
            raise ValidationError(
                f"dies_per_layer={self.dies_per_layer} does not divide total_dies={self.total_dies}")
        if not (self.die_x > 0 and self.die_y > 0):
            raise ValidationError("HBM die dimensions must be > 0")
        if self.gap < 0:
            raise ValidationError("HBM gap must be >= 0")

    @property
    def n_layers(self) -> int:
        return self.total_dies // self.dies_per_layer


@dataclass(frozen=True)
class HbmLayout:
    rows: int
    cols: int
    rects: tuple  # ((x0, y0, x1, y1), ...) row-major from the lower-left die


def grid_shape(n: int) -> tuple[int, int]:
    rows = max(d for d in range(1, math.isqrt(n) + 1) if n % d == 0)
    return rows, n // rows


def hbm_layout(dies_per_layer: int, footprint: tuple[float, float], gap: float,
               die: tuple[float, float] = (3.6e-3, 4.75e-3)) -> HbmLayout:
    """Centered rows x cols grid of dies; cols run along x."""
    if dies_per_layer < 1:
        raise ValidationError("dies_per_layer must be >= 1")
    rows, cols = grid_shape(dies_per_layer)
    fx, fy = footprint
    die_x, die_y = die
    width = cols * die_x + (cols - 1) * gap
    height = rows * die_y + (rows - 1) * gap
    for dim, need, have in (("x", width, fx), ("y", height, fy)):
        if need > have * (1 + 1e-12):
            raise GeometryError(
                f"{rows}x{cols} HBM grid needs {need * 1e3:.4g} mm along {dim} "
                f"but the footprint is {have * 1e3:.4g} mm", dimension=dim)
    x0 = 0.5 * (fx - width)
    y0 = 0.5 * (fy - height)
    rects = []
    for r in range(rows):
        for c in range(cols):
            xa = x0 + c * (die_x + gap)
            ya = y0 + r * (die_y + gap)
            rects.append((xa, ya, xa + die_x, ya + die_y))
    return HbmLayout(rows, cols, tuple(rects))


@dataclass(frozen=True)
class StackSpec:
    """Declarative package description. Lengths in m, power in W."""

    footprint_x: float = 24e-3
    footprint_y: float = 24e-3
    hbm: HbmDistribution = field(default_factory=HbmDistribution)
    hbm_thickness: float = 0.3e-3
    hbm_material: str = "silicon"
    hbm_tsv_fraction: float = DEFAULT_TSV_FRACTION
    hbm_power_per_die_w: float = 1.0
    interposer_material: str = "hbn"
    interposer_thickness: float = 300e-6
    interposer_tsv_fraction: float = DEFAULT_TSV_FRACTION
    gpu_x: float = 16e-3
    gpu_y: float = 16e-3
    gpu_thickness: float = 0.5e-3
    gpu_material: str = "silicon"
    gpu_power_w: float | None = None
    gpu_power_density: float | None = None  # W/cm^2
    substrate: LayerSpec = LayerSpec("substrate", 1.0e-3, "organic_substrate")
    tim: LayerSpec = LayerSpec("tim", 0.05e-3, "tim")
    heat_sink: LayerSpec = LayerSpec("heat_sink", 0.5e-3, "copper")
    fill_material: str = "mold"
    via_material: str = "copper"
    h_top: float = 250.0  # W/(m^2 K)
    h_bottom: float = 10.0
    t_ambient: float = 298.15  # K

    def __post_init__(self):
        if self.gpu_power_w is None and self.gpu_power_density is None:
            object.__setattr__(self, "gpu_power_density", 100.0)
        if (self.gpu_power_w is None) == (self.gpu_power_density is None):
            raise ValidationError("set exactly one of gpu_power_w / gpu_power_density")
        if self.gpu_power_w is not None and self.gpu_power_w < 0:
            raise ValidationError("gpu_power_w must be >= 0")
        if self.gpu_power_density is not None and self.gpu_power_density < 0:
            raise ValidationError("gpu_power_density must be >= 0")
        if not (self.footprint_x > 0 and self.footprint_y > 0):
            raise ValidationError("footprint must be > 0 in both axes")
        for name in ("hbm_thickness", "interposer_thickness", "gpu_thickness", "gpu_x", "gpu_y"):
            if not getattr(self, name) > 0:
                raise ValidationError(f"{name} must be > 0")
        if self.gpu_x > self.footprint_x * (1 + 1e-12) or self.gpu_y > self.footprint_y * (1 + 1e-12):
            raise GeometryError("GPU die exceeds the footprint",
                                dimension="x" if self.gpu_x > self.footprint_x else "y")
        if self.hbm_power_per_die_w < 0:
            raise ValidationError("hbm_power_per_die_w must be >= 0")
        if not self.h_bottom > 0:
            raise ValidationError("h_bottom must be > 0")
        if not self.h_top > 0:
            raise ValidationError("h_top must be > 0")
        if not self.t_ambient > 0:
            raise ValidationError("t_ambient must be > 0 K")
        for name in ("hbm_tsv_fraction", "interposer_tsv_fraction"):
            if not 0.0 <= getattr(self, name) <= 1.0:
                raise ValidationError(f"{name} must lie in [0, 1]")
        lo, hi = H_TOP_BAND
        if not lo <= self.h_top <= hi:
            warnings.warn(f"h_top={self.h_top} W/(m^2 K) is outside the forced-convection band "
                          f"{lo:g}-{hi:g}", stacklevel=3)

    @property
    def gpu_area(self) -> float:
        return self.gpu_x * self.gpu_y

    @property
    def gpu_total_power(self) -> float:
        if self.gpu_power_w is not None:
            return float(self.gpu_power_w)
        return self.gpu_power_density * 1e4 * self.gpu_area

    @property
    def hbm_total_power(self) -> float:
        return self.hbm_power_per_die_w * self.hbm.total_dies

    @property
    def total_power(self) -> float:
        return self.gpu_total_power + self.hbm_total_power

    @property
    def layers(self) -> list[LayerSpec]:
        return expand_stack(self)

    def with_tdp(self, tdp_w: float) -> StackSpec:
        return replace(self, gpu_power_w=tdp_w, gpu_power_density=None)

    def with_distribution(self, dies_per_layer: int) -> StackSpec:
        return replace(self, hbm=replace(self.hbm, dies_per_layer=dies_per_layer))


def expand_stack(spec: StackSpec) -> list[LayerSpec]:
    """Concrete bottom-to-top layers: substrate, (hbm_tier, interposer) x n, gpu, tim, sink."""
    hbm = spec.hbm
    if hbm.dies_per_layer * hbm.n_layers != hbm.total_dies:
        raise ValidationError(
            f"{hbm.dies_per_layer} dies/layer x {hbm.n_layers} layers != {hbm.total_dies} dies")
    layers = [spec.substrate]
    for _ in range(hbm.n_layers):
        layers.append(LayerSpec("hbm_tier", spec.hbm_thickness, spec.hbm_material, spec.hbm_tsv_fraction))
        layers.append(LayerSpec("interposer", spec.interposer_thickness, spec.interposer_material,
                                spec.interposer_tsv_fraction))
    layers.append(LayerSpec("gpu", spec.gpu_thickness, spec.gpu_material))
    layers.append(spec.tim)
    layers.append(spec.heat_sink)
    return layers


@dataclass(frozen=True, eq=False)
class VoxelModel:
    """Rectilinear cell-centered grid. Cell arrays have shape (nz, ny, nx), x fastest."""

    x_edges: np.ndarray
    y_edges: np.ndarray
    z_edges: np.ndarray
    material_id: np.ndarray
    materials: tuple
    power_density: np.ndarray  # W/m^3
    h_top: float
    h_bottom: float
    t_ambient: float
    region: np.ndarray | None = None
    z_layer: np.ndarray | None = None  # layer index of each z cell
    layers: tuple = ()

    def __post_init__(self):
        shape = self.shape
        if self.material_id.shape != shape or self.power_density.shape != shape:
            raise ValidationError("cell arrays must have shape (nz, ny, nx)")
        if self.material_id.min() < 0 or self.material_id.max() >= len(self.materials):
            raise ValidationError("cell material id out of range")
        if np.any(self.power_density < 0) or not np.all(np.isfinite(self.power_density)):
            raise ValidationError("power density must be finite and >= 0")
        for edges in (self.x_edges, self.y_edges, self.z_edges):
            if np.any(np.diff(edges) <= 0):
                raise ValidationError("cell edges must be strictly increasing")
        if self.region is None:
            object.__setattr__(self, "region", np.zeros(shape, dtype=np.int8))
        for arr in (self.x_edges, self.y_edges, self.z_edges, self.material_id,
                    self.power_density, self.region):
            arr.setflags(write=False)

    @classmethod
    def homogeneous(cls, x_edges, y_edges, z_edges, material: Material, power_density=0.0,
                    h_top=10.0, h_bottom=10.0, t_ambient=300.0):
        shape = (len(z_edges) - 1, len(y_edges) - 1, len(x_edges) - 1)
        q = np.broadcast_to(np.asarray(power_density, dtype=float), shape).copy()
        return cls(np.asarray(x_edges, float), np.asarray(y_edges, float), np.asarray(z_edges, float),
                   np.zeros(shape, dtype=np.int32), (material,), q, h_top, h_bottom, t_ambient)

    @property
    def nx(self) -> int:
        return len(self.x_edges) - 1

    @property
    def ny(self) -> int:
        return len(self.y_edges) - 1

    @property
    def nz(self) -> int:
        return len(self.z_edges) - 1

    @property
    def shape(self) -> tuple[int, int, int]:
        return (self.nz, self.ny, self.nx)

    @property
    def n_cells(self) -> int:
        return self.nx * self.ny * self.nz

    @property
    def dx(self):
        return np.diff(self.x_edges)

    @property
    def dy(self):
        return np.diff(self.y_edges)

    @property
    def dz(self):
        return np.diff(self.z_edges)

    @cached_property
    def cell_area(self) -> np.ndarray:
        """Footprint area of each (y, x) column."""
        return np.outer(self.dy, self.dx)

    @cached_property
    def cell_volume(self) -> np.ndarray:
        return self.dz[:, None, None] * self.cell_area[None, :, :]

    def centers(self, axis: int) -> np.ndarray:
        edges = (self.x_edges, self.y_edges, self.z_edges)[axis]
        return 0.5 * (edges[1:] + edges[:-1])

    def property_field(self, attr: str) -> np.ndarray:
        table = np.array([getattr(m, attr) for m in self.materials], dtype=float)
        return table[self.material_id]

    def conductivity(self, axis: int) -> np.ndarray:
        return self.property_field(("k_xx", "k_yy", "k_zz")[axis])

    def heat_capacity(self) -> np.ndarray:
        """Cell heat capacity rho*cp*V, J/K."""
        return self.property_field("volumetric_heat_capacity") * self.cell_volume

    @property
    def total_power(self) -> float:
        return float(np.sum(self.power_density * self.cell_volume))

    def z_range(self, kind: str) -> list[int]:
        """z-cell indices belonging to layers of ``kind``."""
        idx = [i for i, layer in enumerate(self.layers) if layer.kind == kind]
        return [k for k in range(self.nz) if self.z_layer is not None and self.z_layer[k] in idx]

    def gpu_mask(self) -> np.ndarray:
        return self.region == REGION_GPU

    def with_power(self, power_density: np.ndarray) -> VoxelModel:
        return replace(self, power_density=np.asarray(power_density, dtype=float))


def _unique_edges(points, tol):
    pts = np.sort(np.asarray(points, dtype=float))
    keep = [pts[0]]
    for p in pts[1:]:
        if p - keep[-1] > tol:
            keep.append(p)
    return np.array(keep)


def _subdivide(breaks, target):
    edges = [breaks[0]]
    for a, b in zip(breaks[:-1], breaks[1:]):
        n = max(1, math.ceil((b - a) / target - 1e-9))
        edges.extend(a + (b - a) * np.arange(1, n + 1) / n)
    edges = np.array(edges)
    edges[-1] = breaks[-1]
    return edges


def _rect_mask(xc, yc, rect):
    x0, y0, x1, y1 = rect
    return ((yc >= y0) & (yc < y1))[:, None] & ((xc >= x0) & (xc < x1))[None, :]


def voxelize(spec: StackSpec, target_cell: float = 0.25e-3, cells_per_layer: int = 2,
             library: MaterialLibrary | None = None, max_dz: float | None = None) -> VoxelModel:
    """Discretize ``spec`` onto a rectilinear grid.

    In-plane edges are snapped to every die and GPU boundary, then each interval
    is split into cells no wider than ``target_cell``. Every layer gets at least
    ``cells_per_layer`` z cells. Powers are spread over the voxelized die
    volumes so the configured totals are conserved exactly.
    """
    if not target_cell > 0:
        raise ValidationError("target_cell must be > 0")
    if cells_per_layer < 1:
        raise ValidationError("cells_per_layer must be >= 1")
    lib = library or builtin_library()
    layers = expand_stack(spec)
    hbm = spec.hbm
    layout = hbm_layout(hbm.dies_per_layer, (spec.footprint_x, spec.footprint_y), hbm.gap,
                        (hbm.die_x, hbm.die_y))

    features = {"HBM die x": hbm.die_x, "HBM die y": hbm.die_y,
                "GPU die x": spec.gpu_x, "GPU die y": spec.gpu_y}
    if layout.cols > 1 or layout.rows > 1:
        features["HBM die gap"] = hbm.gap
    features = {k: v for k, v in features.items() if v > 0}
    name, smallest = min(features.items(), key=lambda kv: kv[1])
    if target_cell > smallest * (1 + 1e-9):
        raise RefinementError(
            f"cell size {target_cell * 1e3:.4g} mm exceeds the smallest feature ({name}, "
            f"{smallest * 1e3:.4g} mm); use target_cell <= {smallest / 2 * 1e3:.4g} mm",
            suggested_cell=smallest / 2)

    gx0 = 0.5 * (spec.footprint_x - spec.gpu_x)
    gy0 = 0.5 * (spec.footprint_y - spec.gpu_y)
    gpu_rect = (gx0, gy0, gx0 + spec.gpu_x, gy0 + spec.gpu_y)
    tol = 1e-9 * max(spec.footprint_x, spec.footprint_y)
    xb = _unique_edges([0.0, spec.footprint_x, gpu_rect[0], gpu_rect[2]]
                       + [v for r in layout.rects for v in (r[0], r[2])], tol)
    yb = _unique_edges([0.0, spec.footprint_y, gpu_rect[1], gpu_rect[3]]
                       + [v for r in layout.rects for v in (r[1], r[3])], tol)
    x_edges = _subdivide(xb, target_cell)
    y_edges = _subdivide(yb, target_cell)

    z_edges = [0.0]
    z_layer = []
    for i, layer in enumerate(layers):
        n = cells_per_layer
        if max_dz is not None:
            n = max(n, math.ceil(layer.thickness / max_dz - 1e-9))
        z0 = z_edges[-1]
        z_edges.extend(z0 + layer.thickness * np.arange(1, n + 1) / n)
        z_layer.extend([i] * n)
    z_edges = np.array(z_edges)
    z_layer = np.array(z_layer)

    xc = 0.5 * (x_edges[1:] + x_edges[:-1])
    yc = 0.5 * (y_edges[1:] + y_edges[:-1])
    nx, ny = len(xc), len(yc)
    cell_area = np.outer(np.diff(y_edges), np.diff(x_edges))

    materials: list[Material] = []
    index: dict[str, int] = {}

    def mat_id(name, tsv_fraction=None):
        mat = lib[name]
        if tsv_fraction:
            mat = effective_tsv_medium(mat, lib[spec.via_material], tsv_fraction,
                                       name=f"tsv_region_{name}_{tsv_fraction:g}")
        if mat.name not in index:
            index[mat.name] = len(materials)
            materials.append(mat)
        return index[mat.name]

    gpu_cols = _rect_mask(xc, yc, gpu_rect)
    die_cols = [_rect_mask(xc, yc, r) for r in layout.rects]
    any_die = np.logical_or.reduce(die_cols)

    plane_mat = np.empty((len(layers), ny, nx), dtype=np.int32)
    plane_region = np.empty((len(layers), ny, nx), dtype=np.int8)
    plane_q = np.zeros((len(layers), ny, nx))
    for i, layer in enumerate(layers):
        if layer.kind == "gpu":
            plane_mat[i] = np.where(gpu_cols, mat_id(layer.material, layer.tsv_fraction),
                                    mat_id(spec.fill_material))
            plane_region[i] = np.where(gpu_cols, REGION_GPU, REGION_FILL)
            area = cell_area[gpu_cols].sum()
            plane_q[i][gpu_cols] = spec.gpu_total_power / (area * layer.thickness)
        elif layer.kind == "hbm_tier":
            # vias run through the whole tier: dies (TSV) and mold fill (through-mold vias)
            plane_mat[i] = np.where(any_die, mat_id(layer.material, layer.tsv_fraction),
                                    mat_id(spec.fill_material, layer.tsv_fraction))
            plane_region[i] = np.where(any_die, REGION_HBM, REGION_FILL)
            for cols in die_cols:
                area = cell_area[cols].sum()
                plane_q[i][cols] = spec.hbm_power_per_die_w / (area * layer.thickness)
        else:
            plane_mat[i] = mat_id(layer.material, layer.tsv_fraction)
            plane_region[i] = REGION_BULK

    return VoxelModel(
        x_edges=x_edges, y_edges=y_edges, z_edges=z_edges,
        material_id=plane_mat[z_layer], materials=tuple(materials),
        power_density=plane_q[z_layer], h_top=spec.h_top, h_bottom=spec.h_bottom,
        t_ambient=spec.t_ambient, region=plane_region[z_layer], z_layer=z_layer,
        layers=tuple(layers),
    )
