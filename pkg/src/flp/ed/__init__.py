"""Sector-resolved exact diagonalization of the correlated-hopping ring."""

from flp.ed.basis import DEFAULT_MAX_DIMENSION, SectorBasis, build_basis
from flp.ed.checkpoint import read_checkpoint, write_checkpoint
from flp.ed.hamiltonian import (
    StateVector,
    apply_hamiltonian,
    assemble_matrix,
    dense_ground_state,
    dense_oracle,
    doublon_counts,
)
from flp.ed.lanczos import LanczosReport, ground_manifold, ground_state_lanczos, lanczos

__all__ = [
    "DEFAULT_MAX_DIMENSION",
    "LanczosReport",
    "SectorBasis",
    "StateVector",
    "apply_hamiltonian",
    "assemble_matrix",
    "build_basis",
    "dense_ground_state",
    "dense_oracle",
    "doublon_counts",
    "ground_manifold",
    "ground_state_lanczos",
    "lanczos",
    "read_checkpoint",
    "write_checkpoint",
]
