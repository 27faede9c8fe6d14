"""Bosonic-chain dynamics: spectra, exceptional points, and entanglement.

The package builds the dynamical matrices of N-mode bosonic chains with
hopping and squeezing interactions, classifies their non-Hermitian spectra
and exceptional points, transports Gaussian covariance matrices under the
induced symplectic flow, and evaluates partial-transpose entanglement
witnesses, with closed-form references for the solvable families.
"""

from .chain import (
    BdgMatrix,
    ChainSpec,
    RealGenerator,
    build_bdg_matrix,
    build_chain_spec,
    chain_spec_from_json,
    chain_spec_to_config,
    chain_spec_to_json,
    particle_hole_residual,
    quadrature_generator,
    symplectic_form,
)
from .dynamics import (
    GROWTH_CAP,
    GaussianState,
    SymplecticPropagator,
    evolve,
    evolve_trajectory,
    initial_state,
    propagator,
)
from .entanglement import (
    Bipartition,
    EntanglementResult,
    bkc_nu_minus,
    chain_nu_minus,
    enhancement_ratio,
    entanglement_result,
    log_negativity,
    nu_closed_form_bkc_ep,
    nu_closed_form_three_mode_nonuniform,
    nu_closed_form_two_mode,
    nu_from_xi,
    nu_minus,
    partial_transpose,
    symplectic_eigenvalues,
    three_mode_surface_spec,
    xi_from_nu,
    xi_series_coefficients,
)
from .spectral import (
    EpCluster,
    EsPoint,
    Region,
    SpectrumReport,
    classify_region,
    detect_eps,
    eigenspectrum,
    jordan_structure,
    locate_ep_1d,
    scan_exceptional_surface,
    spectrum_report,
)
from . import errors

__version__ = "0.1.0"

__all__ = [
    "BdgMatrix",
    "Bipartition",
    "ChainSpec",
    "EntanglementResult",
    "EpCluster",
    "EsPoint",
    "GROWTH_CAP",
    "GaussianState",
    "RealGenerator",
    "Region",
    "SpectrumReport",
    "SymplecticPropagator",
    "bkc_nu_minus",
    "build_bdg_matrix",
    "build_chain_spec",
    "chain_nu_minus",
    "chain_spec_from_json",
    "chain_spec_to_config",
    "chain_spec_to_json",
    "classify_region",
    "detect_eps",
    "eigenspectrum",
    "enhancement_ratio",
    "entanglement_result",
    "errors",
    "evolve",
    "evolve_trajectory",
    "initial_state",
    "jordan_structure",
    "locate_ep_1d",
    "log_negativity",
    "nu_closed_form_bkc_ep",
    "nu_closed_form_three_mode_nonuniform",
    "nu_closed_form_two_mode",
    "nu_from_xi",
    "nu_minus",
    "partial_transpose",
    "particle_hole_residual",
    "propagator",
    "quadrature_generator",
    "scan_exceptional_surface",
    "spectrum_report",
    "symplectic_eigenvalues",
    "symplectic_form",
    "three_mode_surface_spec",
    "xi_from_nu",
    "xi_series_coefficients",
    "__version__",
]
