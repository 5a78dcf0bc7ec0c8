use alloc::vec;
use alloc::vec::Vec;

use nalgebra::DMatrix;
use num_complex::Complex64;

use super::state::{z_value, StateVector};
use crate::error::{Error, Result};
use crate::lattice::ModelSpec;

/// Default spin-count cap for exact diagonalization.
pub const DEFAULT_ED_CAP: usize = 14;

/// The Ising Hamiltonian in the z basis, which is real.
///
/// Stored matrix-free: the diagonal plus one `(flip mask, J_ij)` pair per
/// bond. [`HamiltonianOperator::to_dense`] materializes the matrix.
#[derive(Debug, Clone)]
pub struct HamiltonianOperator {
    spec: ModelSpec,
    diagonal: Vec<f64>,
    bonds: Vec<(usize, f64)>,
}

pub fn build_hamiltonian(spec: &ModelSpec) -> Result<HamiltonianOperator> {
    build_hamiltonian_with_cap(spec, DEFAULT_ED_CAP)
}

pub fn build_hamiltonian_with_cap(spec: &ModelSpec, cap: usize) -> Result<HamiltonianOperator> {
    let n = spec.n();
    if n > cap {
        return Err(Error::Capacity { n, cap });
    }
    let dim = 1usize << n;
    let fields: Vec<f64> = (0..n).map(|i| 0.5 * spec.site_field(i)).collect();
    let diagonal = (0..dim)
        .map(|b| fields.iter().enumerate().map(|(i, h)| h * z_value(b, i)).sum())
        .collect();
    let bonds = spec
        .couplings
        .bonds()
        .map(|(i, j, v)| ((1usize << i) | (1usize << j), v))
        .collect();
    Ok(HamiltonianOperator {
        spec: spec.clone(),
        diagonal,
        bonds,
    })
}

impl HamiltonianOperator {
    pub fn spec(&self) -> &ModelSpec {
        &self.spec
    }

    pub fn n(&self) -> usize {
        self.spec.n()
    }

    pub fn dim(&self) -> usize {
        self.diagonal.len()
    }

    pub fn diagonal(&self) -> &[f64] {
        &self.diagonal
    }

    /// `out = H psi`.
    pub fn apply(&self, psi: &[Complex64], out: &mut [Complex64]) {
        debug_assert_eq!(psi.len(), self.dim());
        debug_assert_eq!(out.len(), self.dim());
        for ((o, p), d) in out.iter_mut().zip(psi).zip(&self.diagonal) {
            *o = p * d;
        }
        for &(mask, j) in &self.bonds {
            for (b, o) in out.iter_mut().enumerate() {
                *o += psi[b ^ mask] * j;
            }
        }
    }

    /// `⟨psi|H|psi⟩`.
    pub fn energy(&self, state: &StateVector) -> f64 {
        let psi = state.amplitudes();
        let mut h_psi = vec![Complex64::new(0.0, 0.0); psi.len()];
        self.apply(psi, &mut h_psi);
        psi.iter().zip(&h_psi).map(|(a, b)| (a.conj() * b).re).sum()
    }

    /// Dense real-symmetric matrix.
    pub fn to_dense(&self) -> DMatrix<f64> {
        let dim = self.dim();
        let mut h = DMatrix::from_diagonal(&nalgebra::DVector::from_column_slice(&self.diagonal));
        for &(mask, j) in &self.bonds {
            for b in 0..dim {
                h[(b, b ^ mask)] += j;
            }
        }
        h
    }

    /// Dense block of the basis states listed in `basis`.
    pub fn dense_block(&self, basis: &[usize]) -> DMatrix<f64> {
        let mut index = vec![usize::MAX; self.dim()];
        for (k, &b) in basis.iter().enumerate() {
            index[b] = k;
        }
        let m = basis.len();
        let mut h = DMatrix::zeros(m, m);
        for (k, &b) in basis.iter().enumerate() {
            h[(k, k)] = self.diagonal[b];
            for &(mask, j) in &self.bonds {
                let target = index[b ^ mask];
                if target != usize::MAX {
                    h[(target, k)] += j;
                }
            }
        }
        h
    }

    /// Crude spectral-radius bound `max_b |H_bb| + Σ |J_ij|`.
    pub fn norm_bound(&self) -> f64 {
        let diag = self.diagonal.iter().fold(0.0f64, |m, d| m.max(d.abs()));
        diag + self.bonds.iter().map(|(_, j)| j.abs()).sum::<f64>()
    }
}

/// Basis states with an even (sector 0) or odd (sector 1) number of down
/// spins. `Π_i σᶻ_i` commutes with the Hamiltonian since every `σˣσˣ` term
/// flips two spins.
pub fn parity_sectors(n: usize) -> [Vec<usize>; 2] {
    let mut sectors = [Vec::new(), Vec::new()];
    for b in 0..(1usize << n) {
        let downs = n as u32 - b.count_ones();
        sectors[(downs & 1) as usize].push(b);
    }
    sectors
}
