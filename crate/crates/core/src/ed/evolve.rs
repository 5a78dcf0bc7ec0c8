//! Real-time evolution `ψ(t) = e^{−iHt} ψ(0)`.
//!
//! Two routes: the cached eigendecomposition (exact at any `t`, cost set by
//! the `O(d³)` diagonalization) and Lanczos-Krylov stepping driven by the
//! matrix-free Hamiltonian.

use alloc::vec;
use alloc::vec::Vec;

use nalgebra::DMatrix;
use num_complex::Complex64;

use super::hamiltonian::HamiltonianOperator;
use super::spectrum::{full_spectrum, SpectralDecomposition};
use super::state::StateVector;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "lowercase"))]
pub enum EvolutionMethod {
    /// Spectral up to `spectral_max_n` spins, Krylov above.
    Auto,
    Spectral,
    Krylov,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvolutionOptions {
    pub method: EvolutionMethod,
    pub spectral_max_n: usize,
    /// Krylov error budget per unit time.
    pub krylov_tolerance: f64,
    pub krylov_max_dim: usize,
}

impl Default for EvolutionOptions {
    fn default() -> Self {
        Self {
            method: EvolutionMethod::Auto,
            spectral_max_n: 8,
            krylov_tolerance: 1e-10,
            krylov_max_dim: 40,
        }
    }
}

impl EvolutionOptions {
    fn use_spectral(&self, n: usize) -> bool {
        match self.method {
            EvolutionMethod::Spectral => true,
            EvolutionMethod::Krylov => false,
            EvolutionMethod::Auto => n <= self.spectral_max_n,
        }
    }
}

/// Evolves `state` to time `t` with default options.
pub fn evolve(state: &StateVector, h: &HamiltonianOperator, t: f64) -> Result<StateVector> {
    evolve_with(state, h, t, &EvolutionOptions::default())
}

pub fn evolve_with(
    state: &StateVector,
    h: &HamiltonianOperator,
    t: f64,
    options: &EvolutionOptions,
) -> Result<StateVector> {
    let mut out = None;
    evolve_grid(state, h, &[t], options, |_, psi| {
        out = Some(psi.clone());
        Ok(())
    })?;
    Ok(out.expect("one grid point visited"))
}

/// Calls `visit(k, ψ(times[k]))` for every grid time in order. `times` must
/// be nondecreasing.
pub fn evolve_grid<F>(
    state: &StateVector,
    h: &HamiltonianOperator,
    times: &[f64],
    options: &EvolutionOptions,
    mut visit: F,
) -> Result<()>
where
    F: FnMut(usize, &StateVector) -> Result<()>,
{
    if state.dim() != h.dim() {
        return Err(Error::DimensionMismatch {
            expected: h.dim(),
            found: state.dim(),
        });
    }
    if times.windows(2).any(|w| !(w[0] <= w[1])) {
        return Err(crate::error::invalid("evolution times must be nondecreasing"));
    }
    if options.use_spectral(h.n()) {
        let spectrum = full_spectrum(h);
        let c = spectrum.coefficients(state)?;
        for (k, &t) in times.iter().enumerate() {
            if t == 0.0 {
                visit(k, state)?;
            } else {
                visit(k, &spectrum.evolve_coefficients(state.n(), &c, t))?;
            }
        }
        return Ok(());
    }
    let mut krylov = Krylov::new(h, options.krylov_tolerance, options.krylov_max_dim);
    let mut psi = state.clone();
    let mut now = 0.0;
    for (k, &t) in times.iter().enumerate() {
        if t != now {
            psi = krylov.propagate(&psi, now, t - now)?;
            now = t;
        }
        visit(k, &psi)?;
    }
    Ok(())
}

/// Evolves with a decomposition that is already available.
pub fn evolve_spectral(
    state: &StateVector,
    spectrum: &SpectralDecomposition,
    times: &[f64],
) -> Result<Vec<StateVector>> {
    let c = spectrum.coefficients(state)?;
    Ok(times
        .iter()
        .map(|&t| spectrum.evolve_coefficients(state.n(), &c, t))
        .collect())
}

struct Krylov<'a> {
    h: &'a HamiltonianOperator,
    tolerance: f64,
    max_dim: usize,
    basis: Vec<Vec<Complex64>>,
    scratch: Vec<Complex64>,
    /// Suggested step carried between calls.
    step_hint: f64,
}

/// Small-space exponential `e^{−iTτ} e₁` from the eigenpairs of `T`.
fn small_exponential(eigvals: &[f64], eigvecs: &DMatrix<f64>, tau: f64) -> Vec<Complex64> {
    let m = eigvals.len();
    let mut out = vec![Complex64::new(0.0, 0.0); m];
    for (k, &theta) in eigvals.iter().enumerate() {
        let w = eigvecs[(0, k)] * Complex64::new(0.0, -theta * tau).exp();
        for (r, o) in out.iter_mut().enumerate() {
            *o += w * eigvecs[(r, k)];
        }
    }
    out
}

fn dot(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

fn norm(a: &[Complex64]) -> f64 {
    a.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt()
}

impl<'a> Krylov<'a> {
    fn new(h: &'a HamiltonianOperator, tolerance: f64, max_dim: usize) -> Self {
        let bound = h.norm_bound().max(1e-300);
        Self {
            h,
            tolerance,
            max_dim: max_dim.max(4),
            basis: Vec::new(),
            scratch: vec![Complex64::new(0.0, 0.0); h.dim()],
            step_hint: 10.0 / bound,
        }
    }

    /// Propagates `psi` by `duration` starting at time `start` (used only in
    /// diagnostics).
    fn propagate(&mut self, psi: &StateVector, start: f64, duration: f64) -> Result<StateVector> {
        let direction = duration.signum();
        let total = duration.abs();
        let mut current = psi.amplitudes().to_vec();
        let mut done = 0.0;
        while done < total {
            let remaining = total - done;
            let (next, taken) = self.step(&current, remaining, direction, start + direction * done)?;
            current = next;
            done += taken;
            if remaining - taken <= 1e-15 * total {
                break;
            }
        }
        Ok(StateVector::from_raw(psi.n(), current))
    }

    /// One Krylov step of at most `max_tau`. Returns the new vector and the
    /// step length actually taken.
    fn step(
        &mut self,
        v: &[Complex64],
        max_tau: f64,
        direction: f64,
        now: f64,
    ) -> Result<(Vec<Complex64>, f64)> {
        let beta0 = norm(v);
        if beta0 == 0.0 {
            return Ok((v.to_vec(), max_tau));
        }
        let target = max_tau.min(self.step_hint.max(1e-3 * max_tau));
        self.basis.clear();
        self.basis.push(v.iter().map(|x| x / beta0).collect());
        let mut alphas: Vec<f64> = Vec::with_capacity(self.max_dim);
        let mut betas: Vec<f64> = Vec::with_capacity(self.max_dim);
        let scale = self.h.norm_bound().max(1e-300);
        let mut breakdown = false;
        let mut last = None;

        for k in 0..self.max_dim {
            self.h.apply(&self.basis[k], &mut self.scratch);
            let mut w = self.scratch.clone();
            let alpha = dot(&self.basis[k], &w).re;
            // Full reorthogonalization keeps the basis orthonormal to rounding.
            for _ in 0..2 {
                for q in &self.basis {
                    let c = dot(q, &w);
                    for (wi, qi) in w.iter_mut().zip(q) {
                        *wi -= c * qi;
                    }
                }
            }
            alphas.push(alpha);
            let beta = norm(&w);
            let m = k + 1;
            if beta <= 1e-12 * scale {
                breakdown = true;
                last = Some(self.decompose(&alphas, &betas));
                break;
            }
            betas.push(beta);
            // Check convergence every few vectors.
            if m >= 4 && (m % 4 == 0 || m == self.max_dim) {
                let (vals, vecs) = self.decompose(&alphas, &betas[..m - 1]);
                let y = small_exponential(&vals, &vecs, direction * target);
                let estimate = beta * y[m - 1].norm() * beta0;
                if estimate <= self.tolerance * target {
                    last = Some((vals, vecs));
                    let inv = 1.0 / beta;
                    self.basis.push(w.iter().map(|x| x * inv).collect());
                    break;
                }
            }
            let inv = 1.0 / beta;
            self.basis.push(w.iter().map(|x| x * inv).collect());
        }

        let m = alphas.len();
        let (vals, vecs) = match last {
            Some(p) => p,
            None => self.decompose(&alphas, &betas[..m - 1]),
        };
        let residual_beta = if breakdown { 0.0 } else { betas[m - 1] };

        let mut tau = if breakdown { max_tau } else { target };
        let mut y;
        loop {
            y = small_exponential(&vals, &vecs, direction * tau);
            let estimate = residual_beta * y[m - 1].norm() * beta0;
            if estimate <= self.tolerance * tau {
                break;
            }
            tau *= 0.5;
            if tau < 1e-13 * max_tau.max(1.0) {
                return Err(Error::KrylovStep {
                    time: now,
                    step: tau,
                    estimate,
                });
            }
        }
        // Grow the next step when this one converged at the target length.
        if !breakdown {
            self.step_hint = if tau >= target { tau * 1.5 } else { tau };
        }

        let mut out = vec![Complex64::new(0.0, 0.0); v.len()];
        for (q, c) in self.basis.iter().take(m).zip(&y) {
            let c = c * beta0;
            for (o, qi) in out.iter_mut().zip(q) {
                *o += c * qi;
            }
        }
        Ok((out, tau))
    }

    fn decompose(&self, alphas: &[f64], betas: &[f64]) -> (Vec<f64>, DMatrix<f64>) {
        let m = alphas.len();
        let mut t = DMatrix::zeros(m, m);
        for i in 0..m {
            t[(i, i)] = alphas[i];
            if i + 1 < m {
                t[(i, i + 1)] = betas[i];
                t[(i + 1, i)] = betas[i];
            }
        }
        let eig = t.symmetric_eigen();
        (eig.eigenvalues.iter().copied().collect(), eig.eigenvectors)
    }
}
