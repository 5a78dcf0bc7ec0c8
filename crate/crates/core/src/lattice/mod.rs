//! Model construction: couplings, disorder and the full Hamiltonian recipe.

mod couplings;
mod disorder;
mod ions;

pub use couplings::{
    fit_alpha, fit_alpha_trimmed, kac_normalization, kac_normalized_couplings,
    power_law_couplings, AlphaFit, CouplingMatrix, Provenance,
};
pub use disorder::{realization_seed, sample_disorder, DisorderRealization};
pub use ions::{
    coupling_from_modes, coupling_from_normal_modes, equilibrium_positions, transverse_hessian,
    transverse_modes, NormalModes, TrapSpec, DEFAULT_RESONANCE_MARGIN,
    EQUILIBRIUM_FORCE_TOLERANCE, EQUILIBRIUM_MAX_ITERATIONS,
};

use crate::error::{invalid, Result};

/// `H = Σ_{i<j} J_ij σˣ_i σˣ_j + (B/2) Σ_i σᶻ_i + Σ_i (D_i/2) σᶻ_i`.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelSpec {
    pub couplings: CouplingMatrix,
    pub field_b: f64,
    pub disorder: DisorderRealization,
}

impl ModelSpec {
    pub fn new(couplings: CouplingMatrix, field_b: f64, disorder: DisorderRealization) -> Result<Self> {
        if couplings.n() != disorder.n() {
            return Err(crate::Error::DimensionMismatch {
                expected: couplings.n(),
                found: disorder.n(),
            });
        }
        if !field_b.is_finite() {
            return Err(invalid("transverse field must be finite"));
        }
        Ok(Self {
            couplings,
            field_b,
            disorder,
        })
    }

    /// Same couplings and field without disorder.
    pub fn clean(couplings: CouplingMatrix, field_b: f64) -> Result<Self> {
        let n = couplings.n();
        Self::new(couplings, field_b, DisorderRealization::clean(n))
    }

    pub fn n(&self) -> usize {
        self.couplings.n()
    }

    /// Total longitudinal field `B + D_i` on site `i`.
    #[inline]
    pub fn site_field(&self, i: usize) -> f64 {
        self.field_b + self.disorder.values[i]
    }
}
