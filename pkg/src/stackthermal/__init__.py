"""Voxel finite-volume thermal simulator for stacked GPU/HBM packages."""

from .materials import Material, MaterialLibrary, builtin_library, effective_tsv_medium
from .stack import (
    HbmDistribution,
    LayerSpec,
    StackSpec,
    VoxelModel,
    expand_stack,
    hbm_layout,
    voxelize,
)
from .fvm import LinearSystem, assemble_system, face_conductance, robin_face_coefficient
from .solve import (
    SolverOptions,
    TemperatureField,
    TransientResult,
    TransientSchedule,
    cg_solve,
    run_transient,
    solve_steady,
)

__version__ = "0.1.0"

__all__ = [
    "HbmDistribution", "LayerSpec", "LinearSystem", "Material", "MaterialLibrary", "SolverOptions",
    "StackSpec", "TemperatureField", "TransientResult", "TransientSchedule", "VoxelModel",
    "assemble_system", "builtin_library", "cg_solve", "effective_tsv_medium", "expand_stack",
    "face_conductance", "hbm_layout", "robin_face_coefficient", "run_transient", "solve_steady", "voxelize",
]
