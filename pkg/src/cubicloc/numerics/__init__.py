"""Dense and Krylov Hilbert-space numerics for small perturbed stabilizer models."""
from .bands import BandSpectrum, BlockSpectra, GapClosedError, band_spectrum
from .chain import bessel_j0_series, hopping_chain, survival_amplitudes
from .dynamics import FlowedBand, iom_drift, offdiagonal_sum, survival_check, truncated_matrix
from .flow import DecayProfile, FlowState, SpectralFlow, flow_generator, locality_profile
from .krylov import KrylovConvergenceError, evolve, evolve_dense
from .paulisum import HilbertSpaceTooLarge, PauliSum, PerturbedHamiltonian, field_perturbation, model_hamiltonian
from .states import ConfigurationBasis, sector_state
from .symmetry import MomentumBlocks

__all__ = [
    "BandSpectrum", "BlockSpectra", "ConfigurationBasis", "DecayProfile", "FlowState", "FlowedBand",
    "GapClosedError", "HilbertSpaceTooLarge", "KrylovConvergenceError", "MomentumBlocks", "PauliSum", "PerturbedHamiltonian",
    "SpectralFlow", "band_spectrum", "bessel_j0_series", "evolve", "evolve_dense", "field_perturbation",
    "flow_generator", "hopping_chain", "iom_drift", "locality_profile", "model_hamiltonian",
    "offdiagonal_sum", "sector_state", "survival_amplitudes", "survival_check", "truncated_matrix",
]
