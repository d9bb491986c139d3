"""Quantum kicked top, its classical map, and pseudoclassical dynamics near quantum resonance."""

__version__ = "0.1.0"

from .spin import SphericalPoint, SpinSpace, QuantumState, build_spin_space, coherent_state, expectations
from .quantum import FloquetOperator, build_floquet, build_floquet_resonant, check_resonance, evolve_trace, husimi, step
from .classical import CartesianState, classical_step, map_angles, phase_portrait
from .pseudo import (
    BranchTable,
    ResonanceOffset,
    WeightedPointSet,
    build_branch_table,
    gaussian_sums,
    merge_points,
    predict_sync_case1,
    predict_sync_case2,
    pseudo_expectations,
    pseudo_step,
    verify_splitting_identity,
)
from .model import KickedTop
from .entanglement import entropy_field, entropy_field_stride, entropy_trace, linear_entropy

__all__ = [
    "SphericalPoint", "SpinSpace", "QuantumState", "build_spin_space", "coherent_state", "expectations",
    "FloquetOperator", "build_floquet", "build_floquet_resonant", "check_resonance", "evolve_trace", "husimi", "step",
    "CartesianState", "classical_step", "map_angles", "phase_portrait",
    "BranchTable", "ResonanceOffset", "WeightedPointSet", "build_branch_table", "gaussian_sums", "merge_points",
    "predict_sync_case1", "predict_sync_case2", "pseudo_expectations", "pseudo_step", "verify_splitting_identity",
    "KickedTop", "entropy_field", "entropy_field_stride", "entropy_trace", "linear_entropy",
]
