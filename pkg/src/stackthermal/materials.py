"""Thermophysical material records and TSV homogenization.

All properties are temperature independent and in SI units. Conductivity is a
diagonal tensor (``k_xx``, ``k_yy`` in-plane, ``k_zz`` through-plane).
"""

from __future__ import annotations

from collections.abc import Iterator, Mapping
from dataclasses import dataclass, replace

from .errors import ValidationError


@dataclass(frozen=True)
class Material:
    name: str
    k_xx: float  # W/(m K)
    k_yy: float
    k_zz: float
    density: float  # kg/m^3
    cp: float  # J/(kg K)
    cte: float = 0.0  # 1/K, carried as data only

    def __post_init__(self):
        for field in ("k_xx", "k_yy", "k_zz", "density", "cp"):
            value = getattr(self, field)
            if not value > 0:
                raise ValidationError(f"material {self.name!r}: {field} must be > 0, got {value}")

    @classmethod
    def isotropic(cls, name, k, density, cp, cte=0.0):
        return cls(name, k, k, k, density, cp, cte)

    @property
    def is_isotropic(self) -> bool:
        return self.k_xx == self.k_yy == self.k_zz

    @property
    def volumetric_heat_capacity(self) -> float:
        return self.density * self.cp

    def conductivity(self, axis: int) -> float:
        """Tensor component along ``axis`` (0=x, 1=y, 2=z)."""
        return (self.k_xx, self.k_yy, self.k_zz)[axis]


class MaterialLibrary(Mapping):
    """Immutable name -> Material map."""

    def __init__(self, materials=()):
        self._items: dict[str, Material] = {}
        for mat in materials:
            if mat.name in self._items:
                raise ValidationError(f"duplicate material name {mat.name!r}")
            self._items[mat.name] = mat

    def __getitem__(self, name: str) -> Material:
        try:
            return self._items[name]
        except KeyError:
            raise KeyError(f"unknown material {name!r}; known: {sorted(self._items)}") from None

    def __iter__(self) -> Iterator[str]:
        return iter(self._items)

    def __len__(self) -> int:
        return len(self._items)

    def __repr__(self):
        return f"MaterialLibrary({sorted(self._items)})"

    def get(self, name, default=None):
        if default is None:
            return self[name]
        return self._items.get(name, default)

    def with_overrides(self, overrides: Mapping[str, Mapping[str, float]]) -> MaterialLibrary:
        """Return a new library with fields replaced or new materials added.

        ``overrides`` maps a material name to a dict of fields. A ``k`` key sets
        all three conductivity components. Unknown names must give every field.
        """
        items = dict(self._items)
        for name, fields in overrides.items():
            fields = dict(fields)
            if "k" in fields:
                k = fields.pop("k")
                fields.update(k_xx=k, k_yy=k, k_zz=k)
            if name in items:
                items[name] = replace(items[name], **fields)
            else:
                items[name] = Material(name=name, **fields)
        return MaterialLibrary(items.values())


DEFAULT_TSV_FRACTION = 0.05


def effective_tsv_medium(matrix: Material, via: Material, volume_fraction: float,
                         name: str | None = None) -> Material:
    """Homogenize vertical vias of ``via`` embedded in ``matrix``.

    Through-plane conductivity uses the parallel rule along the via axis;
    in-plane components use Maxwell-Eucken with the via as dispersed phase.
    Volumetric heat capacity and density are volume averaged.
    """
    phi = float(volume_fraction)
    if not 0.0 <= phi <= 1.0:
        raise ValueError(f"volume_fraction must lie in [0, 1], got {volume_fraction}")
    if phi == 0.0:
        return matrix
    if phi == 1.0:
        return via

    def maxwell_eucken(k_m, k_v):
        return k_m * (k_v * (1 + phi) + k_m * (1 - phi)) / (k_v * (1 - phi) + k_m * (1 + phi))

    density = phi * via.density + (1 - phi) * matrix.density
    rho_cp = phi * via.volumetric_heat_capacity + (1 - phi) * matrix.volumetric_heat_capacity
    return Material(
        name=name or f"tsv_region_{matrix.name}_{phi:g}",
        k_xx=maxwell_eucken(matrix.k_xx, via.k_xx),
        k_yy=maxwell_eucken(matrix.k_yy, via.k_yy),
        k_zz=phi * via.k_zz + (1 - phi) * matrix.k_zz,
        density=density,
        cp=rho_cp / density,
        cte=phi * via.cte + (1 - phi) * matrix.cte,
    )


def builtin_library() -> MaterialLibrary:
    """Default package materials.

    h-BN and Si follow the published property table (Si at the middle of its
    130-150 W/(m K) range, h-BN through-plane at the top of 2-20 W/(m K)).
    Densities and the non-table materials are handbook defaults.
    """
    hbn = Material("hbn", 751.0, 751.0, 20.0, density=2100.0, cp=800.0, cte=2.5e-6)
    silicon = Material.isotropic("silicon", 140.0, density=2329.0, cp=700.0, cte=2.6e-6)
    copper = Material.isotropic("copper", 400.0, density=8960.0, cp=385.0, cte=16.5e-6)
    base = [
        hbn,
        silicon,
        copper,
        Material.isotropic("tim", 5.0, density=2500.0, cp=1000.0, cte=30e-6),
        Material.isotropic("mold", 1.0, density=1900.0, cp=900.0, cte=10e-6),
        Material.isotropic("organic_substrate", 0.5, density=1850.0, cp=1000.0, cte=17e-6),
    ]
    tsv = [
        effective_tsv_medium(silicon, copper, DEFAULT_TSV_FRACTION, name="tsv_region_silicon"),
        effective_tsv_medium(hbn, copper, DEFAULT_TSV_FRACTION, name="tsv_region_hbn"),
    ]
    return MaterialLibrary(base + tsv)
