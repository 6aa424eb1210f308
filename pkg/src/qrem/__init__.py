"""Random energy model in a transverse field: spectra, gaps, annealing."""

from .instances import (
    MAX_SPINS,
    RNG_VERSION,
    RemInstance,
    ensemble_seed,
    export_energies_raw,
    gaussian_energies,
    instance_from_energies,
    load_header,
    sample_instance,
    save_header,
)
from .thermo import (
    E0_DENSITY,
    GAMMA_C0,
    LOG2,
    T_C,
    PhasePoint,
    classical_free_energy,
    entropy_density,
    paramagnetic_free_energy,
    phase_boundary,
)
from .hamiltonian import (
    FieldedHamiltonian,
    QuantumState,
    apply,
    dense_matrix,
    load_state,
    qp_ground_state,
    save_state,
)
from .eigensolver import EigenResult, lowest_eigenpairs
from .perturbation import (
    branch_crossing,
    minimal_gap_prediction,
    qp_branch,
    rem_branch,
    two_level_gap,
)
from .gaps import (
    GapResult,
    ScalingResult,
    SpectrumCurve,
    gap_scaling_ensemble,
    minimal_gap,
    spectrum_vs_field,
)
from .anneal import AnnealResult, Schedule, evolve, success_vs_tau
from .instanton import (
    InstantonParams,
    ThetaChoice,
    balanced_theta_action,
    instanton_action,
    static_m,
    surface_cost_gap,
)

__version__ = "0.1.0"

__all__ = [
    "AnnealResult",
    "E0_DENSITY",
    "EigenResult",
    "FieldedHamiltonian",
    "GAMMA_C0",
    "GapResult",
    "InstantonParams",
    "LOG2",
    "MAX_SPINS",
    "PhasePoint",
    "QuantumState",
    "RNG_VERSION",
    "RemInstance",
    "ScalingResult",
    "Schedule",
    "SpectrumCurve",
    "T_C",
    "ThetaChoice",
    "apply",
    "balanced_theta_action",
    "branch_crossing",
    "classical_free_energy",
    "dense_matrix",
    "ensemble_seed",
    "entropy_density",
    "evolve",
    "export_energies_raw",
    "gap_scaling_ensemble",
    "gaussian_energies",
    "instance_from_energies",
    "instanton_action",
    "load_header",
    "load_state",
    "lowest_eigenpairs",
    "minimal_gap",
    "minimal_gap_prediction",
    "paramagnetic_free_energy",
    "phase_boundary",
    "qp_branch",
    "qp_ground_state",
    "rem_branch",
    "sample_instance",
    "save_header",
    "save_state",
    "spectrum_vs_field",
    "static_m",
    "success_vs_tau",
    "surface_cost_gap",
    "two_level_gap",
    "__version__",
]
