"""Causality diagnostics for open PT-symmetric resonators.

Exact rational reflection responses of gain-loss dimers and chains,
pole/residue analysis, Blaschke winding numbers, residue-corrected
Kramers-Kronig reconstruction, and the critical-scaling experiments
built on top of them.
"""

__version__ = "0.1.0"

from ._kernels import backend
from .blaschke import (
    BlaschkeFactorization,
    ContourError,
    argument_principle_integral,
    blaschke_factor,
    bode_sum,
    factorize,
    winding_number_contour,
)
from .experiments import (
    FitRefusedError,
    PeakNotDetectableError,
    PhaseMap,
    PoleFitResult,
    PoleTrajectory,
    ScalingFit,
    SSHResult,
    chain_critical_gamma,
    fit_power_law,
    fit_uhp_pole,
    phase_diagram,
    pole_trajectory,
    scaling_experiment,
    ssh_chain,
    ssh_experiment,
)
from .kk import (
    CSVFormatError,
    DEFAULT_GRID,
    DEFAULT_PAD_FACTOR,
    FrequencyGrid,
    KKResult,
    SampledResponse,
    corrected_kk,
    hilbert_transform,
    kk_residual_report,
    read_spectrum_csv,
    remove_offset,
    residue_correction,
    residue_correction_imag,
    sample_response,
    standard_kk,
    uhp_pole_data,
)
from .response import (
    BOUNDARY_TOL,
    BoundaryPoleError,
    ChainModel,
    DimerParams,
    EPDegenerateError,
    PoleData,
    RationalResponse,
    SP,
    SYM,
    build_effective_hamiltonian,
    char_poly,
    critical_gamma,
    im_omega_plus_leading,
    poles,
    reflection_response,
    residues,
    residues_from_eigvectors,
    uhp_poles,
    uhp_threshold,
)

__all__ = [
    "BOUNDARY_TOL",
    "BlaschkeFactorization",
    "BoundaryPoleError",
    "CSVFormatError",
    "ChainModel",
    "ContourError",
    "DEFAULT_GRID",
    "DEFAULT_PAD_FACTOR",
    "DimerParams",
    "EPDegenerateError",
    "FitRefusedError",
    "FrequencyGrid",
    "KKResult",
    "PeakNotDetectableError",
    "PhaseMap",
    "PoleData",
    "PoleFitResult",
    "PoleTrajectory",
    "RationalResponse",
    "SP",
    "SSHResult",
    "SYM",
    "SampledResponse",
    "ScalingFit",
    "argument_principle_integral",
    "backend",
    "blaschke_factor",
    "bode_sum",
    "build_effective_hamiltonian",
    "chain_critical_gamma",
    "char_poly",
    "corrected_kk",
    "critical_gamma",
    "factorize",
    "fit_power_law",
    "fit_uhp_pole",
    "hilbert_transform",
    "im_omega_plus_leading",
    "kk_residual_report",
    "phase_diagram",
    "pole_trajectory",
    "poles",
    "read_spectrum_csv",
    "reflection_response",
    "remove_offset",
    "residue_correction",
    "residue_correction_imag",
    "residues",
    "residues_from_eigvectors",
    "sample_response",
    "scaling_experiment",
    "ssh_chain",
    "ssh_experiment",
    "standard_kk",
    "uhp_pole_data",
    "uhp_poles",
    "uhp_threshold",
    "winding_number_contour",
]
