//! Non-interacting control: the Jordan-Wigner fermionized chain with the
//! string operators frozen at their initial-state values.
//!
//! Occupation convention: spin up is an empty mode, `n_j = (1 − σᶻ_j)/2`,
//! and `c_j = K_j σ⁺_j` with `K_j = Π_{k<j} σᶻ_k`. Then
//!
//! `σˣ_i σˣ_j = S_ij [(c_i†c_j + h.c.) + (c_i†c_j† + h.c.)]`, `i < j`,
//!
//! where `S_ij = Π_{i<k<j} σᶻ_k` is replaced by its value in the initial
//! z-product state. Nearest-neighbor strings are empty, so the mapping is
//! exact for nearest-neighbor couplings.

use alloc::vec;
use alloc::vec::Vec;

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{invalid, Error, Result};
use crate::lattice::ModelSpec;
use crate::observables::{staggered_fisher_information, InitialPattern};

/// `H = Σ_ij h_ij c_i†c_j + ½ Σ_ij (Δ_ij c_i†c_j† + h.c.)`, real blocks.
#[derive(Debug, Clone, PartialEq)]
pub struct BdgHamiltonian {
    pub n: usize,
    /// Hermitian (real symmetric); diagonal `−(B + D_i)`.
    pub hopping: DMatrix<f64>,
    /// Antisymmetric.
    pub pairing: DMatrix<f64>,
    /// Frozen string factors `S_ij ∈ {±1}` (1 on and next to the diagonal).
    pub string_signs: DMatrix<f64>,
}

pub fn build_bdg(spec: &ModelSpec, pattern: &InitialPattern) -> Result<BdgHamiltonian> {
    let n = spec.n();
    if pattern.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: pattern.len(),
        });
    }
    let signs = pattern.signs();
    let mut string_signs = DMatrix::from_element(n, n, 1.0);
    for i in 0..n {
        let mut s = 1.0;
        for j in (i + 1)..n {
            string_signs[(i, j)] = s;
            string_signs[(j, i)] = s;
            s *= signs[j] as f64;
        }
    }
    let mut hopping = DMatrix::zeros(n, n);
    let mut pairing = DMatrix::zeros(n, n);
    for i in 0..n {
        hopping[(i, i)] = -spec.site_field(i);
        for j in (i + 1)..n {
            let t = spec.couplings.get(i, j) * string_signs[(i, j)];
            hopping[(i, j)] = t;
            hopping[(j, i)] = t;
            pairing[(i, j)] = t;
            pairing[(j, i)] = -t;
        }
    }
    Ok(BdgHamiltonian {
        n,
        hopping,
        pairing,
        string_signs,
    })
}

impl BdgHamiltonian {
    /// Nambu matrix `ℋ = [[h, Δ], [−Δ, −h]]` acting on `(c, c†)`.
    pub fn nambu(&self) -> DMatrix<f64> {
        let n = self.n;
        let mut m = DMatrix::zeros(2 * n, 2 * n);
        m.view_mut((0, 0), (n, n)).copy_from(&self.hopping);
        m.view_mut((0, n), (n, n)).copy_from(&self.pairing);
        m.view_mut((n, 0), (n, n)).copy_from(&(-&self.pairing));
        m.view_mut((n, n), (n, n)).copy_from(&(-&self.hopping));
        m
    }
}

/// Two-point functions `g_ij = ⟨c_i†c_j⟩`, `f_ij = ⟨c_i c_j⟩`.
#[derive(Debug, Clone, PartialEq)]
pub struct CovarianceState {
    pub g: DMatrix<Complex64>,
    pub f: DMatrix<Complex64>,
}

/// Fock state of the z-product `pattern`: `g = diag((1 − s_i)/2)`, `f = 0`.
pub fn init_covariance(pattern: &InitialPattern) -> CovarianceState {
    let n = pattern.len();
    let zero = Complex64::new(0.0, 0.0);
    let mut g = DMatrix::from_element(n, n, zero);
    for (i, &s) in pattern.signs().iter().enumerate() {
        g[(i, i)] = Complex64::new((1.0 - s as f64) / 2.0, 0.0);
    }
    CovarianceState {
        g,
        f: DMatrix::from_element(n, n, zero),
    }
}

/// Fermionic operator for Wick contractions.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Annihilate(usize),
    Create(usize),
}

impl CovarianceState {
    pub fn n(&self) -> usize {
        self.g.nrows()
    }

    /// `Γ_ab = ⟨Ψ_a Ψ_b†⟩` with `Ψ = (c, c†)`: `[[1 − gᵀ, f], [f†, g]]`.
    pub fn correlation_matrix(&self) -> DMatrix<Complex64> {
        let n = self.n();
        let mut c = DMatrix::from_element(2 * n, 2 * n, Complex64::new(0.0, 0.0));
        for i in 0..n {
            for j in 0..n {
                let delta = if i == j { 1.0 } else { 0.0 };
                c[(i, j)] = Complex64::new(delta, 0.0) - self.g[(j, i)];
                c[(i, n + j)] = self.f[(i, j)];
                c[(n + i, j)] = self.f[(j, i)].conj();
                c[(n + i, n + j)] = self.g[(i, j)];
            }
        }
        c
    }

    pub fn from_correlation_matrix(c: &DMatrix<Complex64>) -> Self {
        let n = c.nrows() / 2;
        Self {
            g: c.view((n, n), (n, n)).clone_owned(),
            f: c.view((0, n), (n, n)).clone_owned(),
        }
    }

    /// Extreme eigenvalues of the correlation matrix; a physical state has
    /// both inside `[0, 1]`.
    pub fn correlation_spectrum_bounds(&self) -> (f64, f64) {
        let eig = self.correlation_matrix().symmetric_eigenvalues();
        let lo = eig.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = eig.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        (lo, hi)
    }

    pub fn is_physical(&self, tolerance: f64) -> bool {
        let (lo, hi) = self.correlation_spectrum_bounds();
        lo >= -tolerance && hi <= 1.0 + tolerance
    }

    /// `⟨a b⟩`.
    pub fn contraction(&self, a: Mode, b: Mode) -> Complex64 {
        use Mode::*;
        match (a, b) {
            (Annihilate(i), Annihilate(j)) => self.f[(i, j)],
            (Create(i), Create(j)) => self.f[(j, i)].conj(),
            (Create(i), Annihilate(j)) => self.g[(i, j)],
            (Annihilate(i), Create(j)) => {
                let delta = if i == j { 1.0 } else { 0.0 };
                Complex64::new(delta, 0.0) - self.g[(j, i)]
            }
        }
    }

    /// `⟨abcd⟩ = ⟨ab⟩⟨cd⟩ − ⟨ac⟩⟨bd⟩ + ⟨ad⟩⟨bc⟩` for a Gaussian state.
    pub fn wick4(&self, a: Mode, b: Mode, c: Mode, d: Mode) -> Complex64 {
        self.contraction(a, b) * self.contraction(c, d) - self.contraction(a, c) * self.contraction(b, d)
            + self.contraction(a, d) * self.contraction(b, c)
    }

    /// `⟨n_i n_j⟩`.
    pub fn density_density(&self, i: usize, j: usize) -> f64 {
        use Mode::*;
        self.wick4(Create(i), Annihilate(i), Create(j), Annihilate(j)).re
    }

    pub fn particle_number(&self) -> f64 {
        (0..self.n()).map(|i| self.g[(i, i)].re).sum()
    }
}

/// `⟨H⟩` of the quadratic Hamiltonian, `−½ Tr(ℋΓ) + ½ Tr h`.
pub fn quadratic_energy(bdg: &BdgHamiltonian, state: &CovarianceState) -> f64 {
    let h = bdg.nambu();
    let c = state.correlation_matrix();
    let mut tr = 0.0;
    for a in 0..h.nrows() {
        for b in 0..h.ncols() {
            tr += h[(a, b)] * c[(b, a)].re;
        }
    }
    -0.5 * tr + 0.5 * bdg.hopping.trace()
}

/// Exact propagator `e^{−iℋt}` from one diagonalization of the Nambu matrix.
#[derive(Debug, Clone)]
pub struct BdgPropagator {
    n: usize,
    energies: Vec<f64>,
    modes: DMatrix<f64>,
}

/// An initial state expressed in the eigenbasis, ready for evaluation at any
/// time.
#[derive(Debug, Clone)]
pub struct PreparedCovariance {
    re: DMatrix<f64>,
    im: DMatrix<f64>,
}

impl BdgPropagator {
    pub fn new(bdg: &BdgHamiltonian) -> Self {
        let eig = bdg.nambu().symmetric_eigen();
        Self {
            n: bdg.n,
            energies: eig.eigenvalues.iter().copied().collect(),
            modes: eig.eigenvectors,
        }
    }

    /// `A = Vᵀ Γ V`.
    pub fn prepare(&self, state: &CovarianceState) -> Result<PreparedCovariance> {
        if state.n() != self.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                found: state.n(),
            });
        }
        let c = state.correlation_matrix();
        let re = c.map(|z| z.re);
        let im = c.map(|z| z.im);
        let v = &self.modes;
        Ok(PreparedCovariance {
            re: v.transpose() * re * v,
            im: v.transpose() * im * v,
        })
    }

    /// `Γ(t) = V Φ A Φ* Vᵀ` with `Φ = diag(e^{−iE_k t})`.
    pub fn evaluate(&self, prepared: &PreparedCovariance, t: f64) -> CovarianceState {
        let dim = 2 * self.n;
        let mut br = DMatrix::zeros(dim, dim);
        let mut bi = DMatrix::zeros(dim, dim);
        let phases: Vec<(f64, f64)> = self.energies.iter().map(|e| (e * t).sin_cos()).collect();
        for l in 0..dim {
            let (sl, cl) = phases[l];
            for k in 0..dim {
                let (sk, ck) = phases[k];
                // e^{−i(E_k − E_l)t}
                let (s, c) = (sk * cl - ck * sl, ck * cl + sk * sl);
                let (ar, ai) = (prepared.re[(k, l)], prepared.im[(k, l)]);
                br[(k, l)] = ar * c + ai * s;
                bi[(k, l)] = ai * c - ar * s;
            }
        }
        let n = self.n;
        let v = &self.modes;
        // Only the columns holding f and g are needed.
        let right = v.rows(n, n).transpose();
        let cr = v * (br * &right);
        let ci = v * (bi * &right);
        let mut g = DMatrix::from_element(n, n, Complex64::new(0.0, 0.0));
        let mut f = g.clone();
        for i in 0..n {
            for j in 0..n {
                f[(i, j)] = Complex64::new(cr[(i, j)], ci[(i, j)]);
                g[(i, j)] = Complex64::new(cr[(n + i, j)], ci[(n + i, j)]);
            }
        }
        CovarianceState { g, f }
    }
}

/// Heisenberg evolution of `state` under `bdg` for time `t`.
pub fn evolve_covariance(state: &CovarianceState, bdg: &BdgHamiltonian, t: f64) -> Result<CovarianceState> {
    let propagator = BdgPropagator::new(bdg);
    let prepared = propagator.prepare(state)?;
    Ok(propagator.evaluate(&prepared, t))
}

/// Spin observables of a Gaussian state.
#[derive(Debug, Clone, PartialEq)]
pub struct FermionObservables {
    pub z: Vec<f64>,
    /// Row-major `⟨σᶻ_iσᶻ_j⟩`.
    pub zz: Vec<f64>,
    /// Normalized staggered QFI `F_Q / N`.
    pub f_q: f64,
}

pub fn ff_observables(state: &CovarianceState) -> Result<FermionObservables> {
    let n = state.n();
    if n == 0 {
        return Err(invalid("empty state"));
    }
    let occupation: Vec<f64> = (0..n).map(|i| state.g[(i, i)].re).collect();
    let z: Vec<f64> = occupation.iter().map(|o| 1.0 - 2.0 * o).collect();
    let mut zz = vec![0.0; n * n];
    for i in 0..n {
        zz[i * n + i] = 1.0;
        for j in (i + 1)..n {
            let nn = state.density_density(i, j);
            let v = 1.0 - 2.0 * occupation[i] - 2.0 * occupation[j] + 4.0 * nn;
            zz[i * n + j] = v;
            zz[j * n + i] = v;
        }
    }
    let f_q = staggered_fisher_information(&z, &zz)? / n as f64;
    Ok(FermionObservables { z, zz, f_q })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::{power_law_couplings, sample_disorder, CouplingMatrix, Provenance};

    fn nearest_neighbor(n: usize, j: f64) -> CouplingMatrix {
        let mut v = vec![0.0; n * n];
        for i in 0..n - 1 {
            v[i * n + i + 1] = j;
            v[(i + 1) * n + i] = j;
        }
        CouplingMatrix::from_values(n, v, Provenance::Explicit).unwrap()
    }

    #[test]
    fn string_signs_are_trivial_for_neighbors() {
        let spec = ModelSpec::clean(power_law_couplings(6, 1.0, 1.0).unwrap(), 2.0).unwrap();
        let bdg = build_bdg(&spec, &InitialPattern::neel(6)).unwrap();
        for i in 0..5 {
            assert_eq!(bdg.string_signs[(i, i + 1)], 1.0);
        }
        assert!(bdg.string_signs.iter().all(|&s| s == 1.0 || s == -1.0));
        // Néel: one down spin strictly between sites 0 and 2.
        assert_eq!(bdg.string_signs[(0, 2)], -1.0);
        assert_eq!(bdg.string_signs[(0, 3)], -1.0);
        assert_eq!(bdg.string_signs[(0, 4)], 1.0);
        assert_eq!(bdg.hopping, bdg.hopping.transpose());
        assert_eq!(bdg.pairing, -bdg.pairing.transpose());
    }

    #[test]
    fn two_site_blocks_by_hand() {
        let spec = ModelSpec::new(
            power_law_couplings(2, 0.8, 1.0).unwrap(),
            1.5,
            crate::lattice::DisorderRealization { w: 1.0, seed: 0, values: vec![0.25, -0.5] },
        )
        .unwrap();
        let bdg = build_bdg(&spec, &InitialPattern::neel(2)).unwrap();
        assert_eq!(bdg.hopping[(0, 0)], -1.75);
        assert_eq!(bdg.hopping[(1, 1)], -1.0);
        assert_eq!(bdg.hopping[(0, 1)], 0.8);
        assert_eq!(bdg.pairing[(0, 1)], 0.8);
        assert_eq!(bdg.pairing[(1, 0)], -0.8);
        assert_eq!(bdg.pairing[(0, 0)], 0.0);
    }

    #[test]
    fn initial_covariances() {
        let all_up = init_covariance(&InitialPattern::new(vec![1; 4]).unwrap());
        assert!(all_up.g.iter().all(|z| z.norm() == 0.0));
        let neel = init_covariance(&InitialPattern::neel(4));
        let diag: Vec<f64> = (0..4).map(|i| neel.g[(i, i)].re).collect();
        assert_eq!(diag, vec![0.0, 1.0, 0.0, 1.0]);
        let (lo, hi) = neel.correlation_spectrum_bounds();
        assert!(lo.abs() < 1e-12 && (hi - 1.0).abs() < 1e-12);
    }

    #[test]
    fn zero_time_is_identity() {
        let spec = ModelSpec::new(
            power_law_couplings(5, 1.0, 3.0).unwrap(),
            4.0,
            sample_disorder(3.0, 2, 5).unwrap(),
        )
        .unwrap();
        let p = InitialPattern::neel(5);
        let bdg = build_bdg(&spec, &p).unwrap();
        let s0 = init_covariance(&p);
        let s = evolve_covariance(&s0, &bdg, 0.0).unwrap();
        assert!((s.g - &s0.g).iter().all(|z| z.norm() < 1e-12));
        assert!(s.f.iter().all(|z| z.norm() < 1e-12));
    }

    #[test]
    fn single_fermion_hops_between_two_sites() {
        // Pure hopping: h = [[0, t], [t, 0]], one particle on site 0.
        let t_hop = 0.7;
        let bdg = BdgHamiltonian {
            n: 2,
            hopping: DMatrix::from_row_slice(2, 2, &[0.0, t_hop, t_hop, 0.0]),
            pairing: DMatrix::zeros(2, 2),
            string_signs: DMatrix::from_element(2, 2, 1.0),
        };
        let s0 = init_covariance(&InitialPattern::new(vec![-1, 1]).unwrap());
        for t in [0.0, 0.3, 1.1, 2.5] {
            let s = evolve_covariance(&s0, &bdg, t).unwrap();
            assert!((s.g[(0, 0)].re - (t_hop * t).cos().powi(2)).abs() < 1e-12);
            assert!((s.particle_number() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn product_state_observables_factorize() {
        let s = init_covariance(&InitialPattern::neel(5));
        let obs = ff_observables(&s).unwrap();
        for i in 0..5 {
            for j in 0..5 {
                assert!((obs.zz[i * 5 + j] - obs.z[i] * obs.z[j]).abs() < 1e-14);
            }
        }
        assert!(obs.f_q.abs() < 1e-14);
    }

    #[test]
    fn evolution_stays_physical_and_conserves_energy() {
        let spec = ModelSpec::new(
            power_law_couplings(6, 1.0, 1.5).unwrap(),
            4.0,
            sample_disorder(3.0, 8, 6).unwrap(),
        )
        .unwrap();
        let p = InitialPattern::neel(6);
        let bdg = build_bdg(&spec, &p).unwrap();
        let s0 = init_covariance(&p);
        let e0 = quadratic_energy(&bdg, &s0);
        let prop = BdgPropagator::new(&bdg);
        let prepared = prop.prepare(&s0).unwrap();
        for t in [0.1, 1.0, 7.0, 40.0] {
            let s = prop.evaluate(&prepared, t);
            assert!(s.is_physical(1e-9));
            assert!((quadratic_energy(&bdg, &s) - e0).abs() < 1e-9);
            assert!((s.f.clone() + s.f.transpose()).iter().all(|z| z.norm() < 1e-12));
        }
    }

    #[test]
    fn neighbor_model_is_exact_against_brute_force_two_sites() {
        // Two spins, J σˣσˣ + fields: fermion and spin pictures coincide.
        let spec = ModelSpec::new(nearest_neighbor(2, 1.0), 0.6, crate::lattice::DisorderRealization { w: 1.0, seed: 0, values: vec![0.3, -0.2] }).unwrap();
        let p = InitialPattern::neel(2);
        let bdg = build_bdg(&spec, &p).unwrap();
        let h = crate::ed::build_hamiltonian(&spec).unwrap();
        let psi0 = p.state().unwrap();
        for t in [0.4, 1.3] {
            let psi = crate::ed::evolve(&psi0, &h, t).unwrap();
            let ff = ff_observables(&evolve_covariance(&init_covariance(&p), &bdg, t).unwrap()).unwrap();
            assert!((ff.z[0] - psi.z_magnetizations()[0]).abs() < 1e-10);
            assert!((ff.zz[1] - psi.zz_correlator(0, 1).unwrap()).abs() < 1e-10);
        }
    }
}
