"""Ground states of two-component rotating BECs by the semi-implicit normalized gradient flow."""

from .energy import EnergyBreakdown, chemical_potential, energy, energy_gradient_pairing
from .gfsi import (
    Backtrack,
    GroundStateResult,
    IterationRecord,
    SolverConfig,
    dissipation_audit,
    gfsi_step,
    heuristic_tau0,
    solve_ground_state,
)
from .grid import GridSpec, WaveField, h1_seminorm_sq, inner_l2, l2_norm, linf_norm
from .kernels import BACKEND
from .linalg import KrylovConfig, Preconditioner, SolveReport, solve_shifted
from .operator import FrozenHamiltonian, apply_h, apply_laplacian, apply_lz, apply_shifted
from .physics import (
    CoercivityReport,
    CustomPotential,
    HarmonicPotential,
    PhysicsParams,
    coercivity_constants,
    densities,
    eval_potential,
)

__version__ = "0.1.0"

__all__ = [
    "BACKEND", "Backtrack", "CoercivityReport", "CustomPotential", "EnergyBreakdown",
    "FrozenHamiltonian", "GridSpec", "GroundStateResult", "HarmonicPotential", "IterationRecord",
    "KrylovConfig", "PhysicsParams", "Preconditioner", "SolveReport", "SolverConfig", "WaveField",
    "apply_h", "apply_laplacian", "apply_lz", "apply_shifted", "chemical_potential",
    "coercivity_constants", "densities", "dissipation_audit", "energy", "energy_gradient_pairing",
    "eval_potential", "gfsi_step", "h1_seminorm_sq", "heuristic_tau0", "inner_l2", "l2_norm",
    "linf_norm", "solve_ground_state", "solve_shifted",
]
