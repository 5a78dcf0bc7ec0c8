use alloc::vec::Vec;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use super::hamiltonian::{parity_sectors, HamiltonianOperator};
use super::state::StateVector;
use crate::error::{Error, Result};

/// Eigenpairs of a real-symmetric Hamiltonian, eigenvalues ascending.
#[derive(Debug, Clone)]
pub struct SpectralDecomposition {
    pub eigenvalues: Vec<f64>,
    /// Column `k` is the eigenvector of `eigenvalues[k]`.
    pub eigenvectors: DMatrix<f64>,
}

fn sorted_order(values: &DVector<f64>) -> Vec<usize> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    order
}

/// Full eigendecomposition of a dense real-symmetric matrix.
pub fn symmetric_decomposition(matrix: DMatrix<f64>) -> SpectralDecomposition {
    let eig = matrix.symmetric_eigen();
    let order = sorted_order(&eig.eigenvalues);
    let eigenvalues = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let eigenvectors = eig.eigenvectors.select_columns(order.iter());
    SpectralDecomposition {
        eigenvalues,
        eigenvectors,
    }
}

/// Ascending eigenvalues of a dense real-symmetric matrix.
pub fn symmetric_eigenvalues(matrix: DMatrix<f64>) -> Vec<f64> {
    let mut v: Vec<f64> = matrix.symmetric_eigenvalues().iter().copied().collect();
    v.sort_by(f64::total_cmp);
    v
}

pub fn full_spectrum(h: &HamiltonianOperator) -> SpectralDecomposition {
    symmetric_decomposition(h.to_dense())
}

/// All eigenvalues, ascending, without eigenvectors.
pub fn eigenvalues(h: &HamiltonianOperator) -> Vec<f64> {
    symmetric_eigenvalues(h.to_dense())
}

/// Ascending eigenvalues of each `Π σᶻ` parity sector (even, odd).
pub fn sector_eigenvalues(h: &HamiltonianOperator) -> [Vec<f64>; 2] {
    let [even, odd] = parity_sectors(h.n());
    [
        symmetric_eigenvalues(h.dense_block(&even)),
        symmetric_eigenvalues(h.dense_block(&odd)),
    ]
}

impl SpectralDecomposition {
    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn width(&self) -> f64 {
        match (self.eigenvalues.first(), self.eigenvalues.last()) {
            (Some(a), Some(b)) => b - a,
            _ => 0.0,
        }
    }

    /// `max |H − U Λ Uᵀ|`.
    pub fn reconstruction_error(&self, h: &DMatrix<f64>) -> f64 {
        let u = &self.eigenvectors;
        let lambda = DMatrix::from_diagonal(&DVector::from_column_slice(&self.eigenvalues));
        (u * lambda * u.transpose() - h).amax()
    }

    /// Expansion coefficients `c_k = ⟨k|ψ⟩`.
    pub fn coefficients(&self, state: &StateVector) -> Result<Vec<Complex64>> {
        if state.dim() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: state.dim(),
            });
        }
        let re = DVector::from_iterator(self.dim(), state.amplitudes().iter().map(|a| a.re));
        let im = DVector::from_iterator(self.dim(), state.amplitudes().iter().map(|a| a.im));
        let cr = self.eigenvectors.tr_mul(&re);
        let ci = self.eigenvectors.tr_mul(&im);
        Ok(cr.iter().zip(ci.iter()).map(|(r, i)| Complex64::new(*r, *i)).collect())
    }

    /// `Σ_k c_k e^{−i E_k t} |k⟩`.
    pub fn evolve_coefficients(&self, n: usize, coefficients: &[Complex64], t: f64) -> StateVector {
        let dim = self.dim();
        let mut re = DVector::zeros(dim);
        let mut im = DVector::zeros(dim);
        for (k, (c, e)) in coefficients.iter().zip(&self.eigenvalues).enumerate() {
            let (s, co) = (e * t).sin_cos();
            // c · (cos − i sin)
            re[k] = c.re * co + c.im * s;
            im[k] = c.im * co - c.re * s;
        }
        let pr = &self.eigenvectors * re;
        let pi = &self.eigenvectors * im;
        let amps = pr.iter().zip(pi.iter()).map(|(r, i)| Complex64::new(*r, *i)).collect();
        StateVector::from_raw(n, amps)
    }

    pub fn evolve(&self, state: &StateVector, t: f64) -> Result<StateVector> {
        let c = self.coefficients(state)?;
        Ok(self.evolve_coefficients(state.n(), &c, t))
    }
}
