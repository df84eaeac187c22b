"""Metrics derived from temperature fields."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .stack import LayerSpec, VoxelModel
from .materials import MaterialLibrary, builtin_library, effective_tsv_medium

# Exponential leakage model calibrated so a 20 K drop gives a 22 % reduction.
LEAKAGE_THETA = -20.0 / math.log(1.0 - 0.22)  # ~80.5 K


@dataclass(frozen=True)
class HotspotReport:
    t_max: float  # K
    location: tuple  # (ix, iy, iz)
    hotspot_area: float  # m^2
    band: float  # K
    mean: float  # K, area-weighted over the region


@dataclass(frozen=True)
class Uniformity:
    mean: float
    std: float
    spread: float  # max - min


@dataclass(frozen=True)
class ScalingEstimate:
    power_density: float  # W/m^3
    length: float  # m
    k_eff: float  # W/(m K)
    calibration: float
    delta_t_est: float  # K


def _region_mask(field_values, region):
    mask = np.asarray(region, dtype=bool)
    if mask.shape != field_values.shape:
        raise ValueError(f"region shape {mask.shape} does not match field {field_values.shape}")
    if not mask.any():
        raise ValueError("region is empty")
    return mask


def _values(field):
    return np.asarray(getattr(field, "values", field), dtype=float)


def hotspot(field, region, band: float = 5.0, cell_area=None) -> HotspotReport:
    """Peak temperature in ``region`` and the footprint area within ``band`` of it.

    The area counts each (x, y) column once if any of its region cells lies in
    the band, so it never exceeds the region's footprint. Ties on the maximum
    resolve to the smallest linear (x-fastest) index.
    """
    values = _values(field)
    mask = _region_mask(values, region)
    if cell_area is None:
        cell_area = np.ones(values.shape[1:])
    masked = np.where(mask, values, -np.inf)
    flat = int(np.argmax(masked))  # argmax returns the first occurrence
    iz, iy, ix = np.unravel_index(flat, values.shape)
    t_max = float(values.flat[flat])
    hot_cols = np.any(mask & (values >= t_max - band), axis=0)
    stats = uniformity(values, mask, cell_area)
    return HotspotReport(t_max, (int(ix), int(iy), int(iz)), float(cell_area[hot_cols].sum()), band, stats.mean)


def uniformity(field, region, cell_area=None) -> Uniformity:
    """Area-weighted mean, standard deviation and max-min over ``region``."""
    values = _values(field)
    mask = _region_mask(values, region)
    if cell_area is None:
        cell_area = np.ones(values.shape[-2:])
    weights = np.broadcast_to(cell_area, values.shape)[mask]
    vals = values[mask]
    mean = float(np.sum(weights * vals) / np.sum(weights))
    var = float(np.sum(weights * (vals - mean) ** 2) / np.sum(weights))
    return Uniformity(mean, math.sqrt(max(var, 0.0)), float(vals.max() - vals.min()))


def thermal_resistance(field, total_power: float, t_e: float) -> float:
    """Junction-to-ambient resistance (t_max - t_e) / P, K/W.

    ``field`` is either a temperature field (its maximum is used) or t_max itself.
    """
    if not total_power > 0:
        raise ValueError("total_power must be > 0")
    t_max = float(field) if np.isscalar(field) else float(_values(field).max())
    return (t_max - t_e) / total_power


def leakage_reduction(delta_t: float, theta: float = LEAKAGE_THETA) -> float:
    """Fractional leakage-power reduction for a junction cooled by ``delta_t`` K.

    Single-exponential estimator, not a device model.
    """
    if not theta > 0:
        raise ValueError("theta must be > 0")
    return -math.expm1(-delta_t / theta)


def _layer_material(layer: LayerSpec, library: MaterialLibrary, via: str):
    mat = library[layer.material]
    if layer.tsv_fraction:
        mat = effective_tsv_medium(mat, library[via], layer.tsv_fraction)
    return mat


def effective_k(layers, library: MaterialLibrary | None = None, via: str = "copper") -> dict:
    """Series (through-plane) and parallel (in-plane) conductivity of a layer stack."""
    library = library or builtin_library()
    t = np.array([layer.thickness for layer in layers])
    mats = [_layer_material(layer, library, via) for layer in layers]
    kz = np.array([m.k_zz for m in mats])
    kx = np.array([m.k_xx for m in mats])
    return {"k_eff_z": float(t.sum() / np.sum(t / kz)), "k_eff_inplane": float(np.sum(t * kx) / t.sum())}


def scaling_estimate(power_density: float, length: float, k_eff: float,
                     calibration: float = 1.0) -> ScalingEstimate:
    """Temperature-rise estimate proportional to q * L^2 / k_eff.

    Only ratios between configurations are meaningful unless ``calibration``
    has been fitted against a full solve.
    """
    if not (power_density > 0 and length > 0 and k_eff > 0 and calibration > 0):
        raise ValueError("scaling_estimate needs positive inputs")
    return ScalingEstimate(power_density, length, k_eff, calibration,
                           calibration * power_density * length ** 2 / k_eff)


def gpu_metrics(field, model: VoxelModel, band: float = 5.0) -> dict:
    """Hotspot, resistance and uniformity over the GPU die cells."""
    mask = model.gpu_mask()
    if not mask.any():
        mask = np.ones(model.shape, dtype=bool)
    spot = hotspot(field, mask, band, model.cell_area)
    stats = uniformity(field, mask, model.cell_area)
    total = model.total_power
    return {
        "t_max": spot.t_max,
        "location": spot.location,
        "hotspot_area": spot.hotspot_area,
        "R": thermal_resistance(spot.t_max, total, model.t_ambient) if total > 0 else 0.0,
        "mean": stats.mean,
        "std": stats.std,
        "spread": stats.spread,
    }
