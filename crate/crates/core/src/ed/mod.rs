//! Exact Hilbert-space representation of the Ising chain.

mod evolve;
mod hamiltonian;
mod spectrum;
mod state;

pub use evolve::{evolve, evolve_grid, evolve_spectral, evolve_with, EvolutionMethod, EvolutionOptions};
pub use hamiltonian::{
    build_hamiltonian, build_hamiltonian_with_cap, parity_sectors, HamiltonianOperator, DEFAULT_ED_CAP,
};
pub use spectrum::{
    eigenvalues, full_spectrum, sector_eigenvalues, symmetric_decomposition, symmetric_eigenvalues,
    SpectralDecomposition,
};
pub use state::{neel_signs, Axis, ReducedDensityMatrix, SiteState, StateVector, MAX_STATE_SITES};

/// Free function form of [`StateVector::reduced_density_matrix`].
pub fn reduced_density_matrix(state: &StateVector, site: usize) -> crate::Result<ReducedDensityMatrix> {
    state.reduced_density_matrix(site)
}

/// Free function form of [`StateVector::expectation_pauli`].
pub fn expectation_pauli(state: &StateVector, site: usize, axis: Axis) -> crate::Result<f64> {
    state.expectation_pauli(site, axis)
}

/// Free function form of [`StateVector::zz_correlator`].
pub fn zz_correlator(state: &StateVector, i: usize, j: usize) -> crate::Result<f64> {
    state.zz_correlator(i, j)
}

/// Free function form of [`StateVector::product_state`].
pub fn product_state(pattern: &[SiteState]) -> crate::Result<StateVector> {
    StateVector::product_state(pattern)
}
