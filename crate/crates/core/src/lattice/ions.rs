//! Linear ion crystals: axial equilibrium, transverse normal modes and the
//! phonon-mediated Ising couplings they produce.
//!
//! Lengths are in units of the natural Coulomb length `(e²/4πε₀Mω_z²)^{1/3}`
//! and every frequency (trap, mode, beatnote, Rabi, recoil) is expressed in
//! units of the axial trap frequency `ω_z`.

use alloc::vec;
use alloc::vec::Vec;

use nalgebra::{DMatrix, DVector};

use super::couplings::{CouplingMatrix, Provenance};
use crate::error::{invalid, Error, Result};

/// Newton iteration cap for [`equilibrium_positions`].
pub const EQUILIBRIUM_MAX_ITERATIONS: usize = 500;
/// Per-ion force tolerance for [`equilibrium_positions`].
pub const EQUILIBRIUM_FORCE_TOLERANCE: f64 = 1e-12;
/// Default relative resonance margin `|μ − ω_m| > margin · ω_m`.
pub const DEFAULT_RESONANCE_MARGIN: f64 = 1e-3;

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct TrapSpec {
    pub ion_count: usize,
    /// Transverse over axial trap frequency, `ω_x / ω_z`.
    pub anisotropy: f64,
    pub rabi_frequency: f64,
    pub recoil_frequency: f64,
    pub beatnote_detuning: f64,
    #[cfg_attr(feature = "serde", serde(default = "default_margin"))]
    pub resonance_margin: f64,
}

#[cfg(feature = "serde")]
fn default_margin() -> f64 {
    DEFAULT_RESONANCE_MARGIN
}

impl TrapSpec {
    pub fn new(
        ion_count: usize,
        anisotropy: f64,
        rabi_frequency: f64,
        recoil_frequency: f64,
        beatnote_detuning: f64,
    ) -> Self {
        Self {
            ion_count,
            anisotropy,
            rabi_frequency,
            recoil_frequency,
            beatnote_detuning,
            resonance_margin: DEFAULT_RESONANCE_MARGIN,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.ion_count < 2 {
            return Err(invalid("a trap needs at least two ions"));
        }
        if !(self.anisotropy > 0.0) || !self.anisotropy.is_finite() {
            return Err(invalid("anisotropy must be positive and finite"));
        }
        if !(self.resonance_margin >= 0.0) {
            return Err(invalid("resonance margin must be nonnegative"));
        }
        Ok(())
    }
}

/// Transverse normal modes of a linear chain. Modes are ordered by
/// decreasing frequency, so mode 0 is the center-of-mass mode.
#[derive(Debug, Clone, PartialEq)]
pub struct NormalModes {
    pub positions: Vec<f64>,
    /// `mode_matrix[(i, m)]` is the participation `b_{i,m}` of ion `i` in mode `m`.
    pub mode_matrix: DMatrix<f64>,
    pub frequencies: Vec<f64>,
}

impl NormalModes {
    pub fn len(&self) -> usize {
        self.frequencies.len()
    }

    pub fn is_empty(&self) -> bool {
        self.frequencies.is_empty()
    }
}

fn potential(u: &[f64]) -> f64 {
    let mut v = 0.0;
    for i in 0..u.len() {
        v += 0.5 * u[i] * u[i];
        for j in (i + 1)..u.len() {
            v += 1.0 / (u[j] - u[i]).abs();
        }
    }
    v
}

fn gradient(u: &[f64]) -> Vec<f64> {
    let n = u.len();
    let mut g = vec![0.0; n];
    for i in 0..n {
        let mut gi = u[i];
        for j in 0..n {
            if i != j {
                let d = u[i] - u[j];
                gi -= d.signum() / (d * d);
            }
        }
        g[i] = gi;
    }
    g
}

fn hessian(u: &[f64]) -> DMatrix<f64> {
    let n = u.len();
    let mut h = DMatrix::zeros(n, n);
    for i in 0..n {
        let mut diag = 1.0;
        for j in 0..n {
            if i != j {
                let c = 2.0 / (u[i] - u[j]).abs().powi(3);
                diag += c;
                h[(i, j)] = -c;
            }
        }
        h[(i, i)] = diag;
    }
    h
}

fn max_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

fn is_ordered(u: &[f64]) -> bool {
    u.windows(2).all(|w| w[0] < w[1])
}

/// Stationary point of `Σ u_i²/2 + Σ_{i<j} 1/|u_i − u_j|`, sorted ascending.
///
/// Damped Newton from a uniformly spaced ansatz.
pub fn equilibrium_positions(n: usize) -> Result<Vec<f64>> {
    if n == 0 {
        return Err(invalid("ion count must be positive"));
    }
    if n == 1 {
        return Ok(vec![0.0]);
    }
    // Approximate minimal spacing at the chain center.
    let spacing = 2.018 / (n as f64).powf(0.559);
    let center = (n as f64 - 1.0) / 2.0;
    let mut u: Vec<f64> = (0..n).map(|i| (i as f64 - center) * spacing).collect();

    let mut residual = f64::INFINITY;
    for _ in 0..EQUILIBRIUM_MAX_ITERATIONS {
        let g = gradient(&u);
        residual = max_abs(&g);
        if residual < EQUILIBRIUM_FORCE_TOLERANCE {
            return Ok(u);
        }
        let h = hessian(&u);
        let grad = DVector::from_column_slice(&g);
        let step = match h.cholesky() {
            Some(chol) => -chol.solve(&grad),
            None => -grad,
        };
        let slope: f64 = step.dot(&DVector::from_column_slice(&g));
        let v0 = potential(&u);
        let mut damping = 1.0;
        loop {
            let trial: Vec<f64> = u
                .iter()
                .zip(step.iter())
                .map(|(x, s)| x + damping * s)
                .collect();
            // Close to the minimum the potential is flat to rounding; take the
            // full Newton step there.
            let accept = is_ordered(&trial)
                && (residual < 1e-6 || potential(&trial) <= v0 + 1e-4 * damping * slope);
            if accept {
                u = trial;
                break;
            }
            damping *= 0.5;
            if damping < 1e-12 {
                return Err(Error::NonConvergence {
                    what: "equilibrium line search",
                    iterations: 0,
                    residual,
                });
            }
        }
    }
    let g = gradient(&u);
    residual = residual.min(max_abs(&g));
    if residual < EQUILIBRIUM_FORCE_TOLERANCE {
        return Ok(u);
    }
    Err(Error::NonConvergence {
        what: "equilibrium positions",
        iterations: EQUILIBRIUM_MAX_ITERATIONS,
        residual,
    })
}

/// Transverse Hessian in units of `ω_z²`.
pub fn transverse_hessian(positions: &[f64], anisotropy: f64) -> DMatrix<f64> {
    let n = positions.len();
    let mut a = DMatrix::zeros(n, n);
    for i in 0..n {
        let mut diag = anisotropy * anisotropy;
        for j in 0..n {
            if i != j {
                let c = 1.0 / (positions[i] - positions[j]).abs().powi(3);
                diag -= c;
                a[(i, j)] = c;
            }
        }
        a[(i, i)] = diag;
    }
    a
}

pub fn transverse_modes(positions: &[f64], anisotropy: f64) -> Result<NormalModes> {
    if positions.is_empty() {
        return Err(invalid("no ions"));
    }
    if !(anisotropy > 0.0) {
        return Err(invalid("anisotropy must be positive"));
    }
    let n = positions.len();
    let eig = transverse_hessian(positions, anisotropy).symmetric_eigen();

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));

    let mut mode_matrix = DMatrix::zeros(n, n);
    let mut frequencies = Vec::with_capacity(n);
    for (m, &k) in order.iter().enumerate() {
        let lambda = eig.eigenvalues[k];
        if lambda <= 0.0 {
            return Err(Error::ZigZagInstability {
                mode: m,
                eigenvalue: lambda,
            });
        }
        frequencies.push(lambda.sqrt());
        let mut col = eig.eigenvectors.column(k).clone_owned();
        // Fix the sign: positive total participation, or a positive first
        // significant entry for modes with vanishing sum.
        let total: f64 = col.iter().sum();
        let flip = if total.abs() > 1e-8 {
            total < 0.0
        } else {
            col.iter().find(|x| x.abs() > 1e-8).is_some_and(|x| *x < 0.0)
        };
        if flip {
            col.neg_mut();
        }
        mode_matrix.set_column(m, &col);
    }
    Ok(NormalModes {
        positions: positions.to_vec(),
        mode_matrix,
        frequencies,
    })
}

/// `J_ij = Ω² ω_R Σ_m b_{i,m} b_{j,m} / (μ² − ω_m²)`, in units of `ω_z`.
pub fn coupling_from_modes(trap: &TrapSpec) -> Result<CouplingMatrix> {
    trap.validate()?;
    let positions = equilibrium_positions(trap.ion_count)?;
    let modes = transverse_modes(&positions, trap.anisotropy)?;
    coupling_from_normal_modes(trap, &modes)
}

/// Same as [`coupling_from_modes`] for precomputed modes.
pub fn coupling_from_normal_modes(trap: &TrapSpec, modes: &NormalModes) -> Result<CouplingMatrix> {
    trap.validate()?;
    let n = trap.ion_count;
    if modes.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: modes.len(),
        });
    }
    let mu = trap.beatnote_detuning;
    let mut weights = Vec::with_capacity(n);
    for (m, &w) in modes.frequencies.iter().enumerate() {
        if (mu - w).abs() <= trap.resonance_margin * w {
            return Err(Error::Resonance {
                mode: m,
                frequency: w,
                detuning: mu,
            });
        }
        weights.push(1.0 / (mu * mu - w * w));
    }
    let prefactor = trap.rabi_frequency * trap.rabi_frequency * trap.recoil_frequency;
    let b = &modes.mode_matrix;
    let mut values = vec![0.0; n * n];
    for i in 0..n {
        for j in (i + 1)..n {
            let s: f64 = (0..n).map(|m| b[(i, m)] * b[(j, m)] * weights[m]).sum();
            values[i * n + j] = prefactor * s;
            values[j * n + i] = prefactor * s;
        }
    }
    CouplingMatrix::from_values(n, values, Provenance::NormalMode(trap.clone()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    /// Plain gradient descent, independent of the Newton solver.
    fn descend(mut u: Vec<f64>, rate: f64, steps: usize) -> Vec<f64> {
        for _ in 0..steps {
            let g = gradient(&u);
            for (x, gi) in u.iter_mut().zip(g) {
                *x -= rate * gi;
            }
        }
        u
    }

    #[test]
    fn single_ion_sits_at_center() {
        assert_eq!(equilibrium_positions(1).unwrap(), vec![0.0]);
    }

    #[test]
    fn two_and_three_ions_match_closed_forms() {
        let a2 = 0.25f64.cbrt();
        let u2 = equilibrium_positions(2).unwrap();
        assert_abs_diff_eq!(u2[0], -a2, epsilon = 1e-10);
        assert_abs_diff_eq!(u2[1], a2, epsilon = 1e-10);
        assert_abs_diff_eq!(a2, 0.629961, epsilon = 1e-6);

        let a3 = 1.25f64.cbrt();
        let u3 = equilibrium_positions(3).unwrap();
        assert_abs_diff_eq!(u3[0], -a3, epsilon = 1e-10);
        assert_abs_diff_eq!(u3[1], 0.0, epsilon = 1e-10);
        assert_abs_diff_eq!(u3[2], a3, epsilon = 1e-10);

        let brute = descend(vec![-1.0, 0.1, 1.0], 0.05, 20000);
        for (x, y) in brute.iter().zip(&u3) {
            assert_abs_diff_eq!(x, y, epsilon = 1e-9);
        }
    }

    #[test]
    fn larger_chains_are_force_free_and_centered() {
        for n in [4, 10, 20, 30] {
            let u = equilibrium_positions(n).unwrap();
            assert!(max_abs(&gradient(&u)) < EQUILIBRIUM_FORCE_TOLERANCE);
            assert!(u.iter().sum::<f64>().abs() < 1e-10);
            assert!(is_ordered(&u));
        }
    }

    #[test]
    fn center_of_mass_mode_is_uniform_at_trap_frequency() {
        for n in [2, 5, 10] {
            let u = equilibrium_positions(n).unwrap();
            let modes = transverse_modes(&u, 10.0).unwrap();
            assert_abs_diff_eq!(modes.frequencies[0], 10.0, epsilon = 1e-10);
            for i in 0..n {
                assert_abs_diff_eq!(
                    modes.mode_matrix[(i, 0)],
                    1.0 / (n as f64).sqrt(),
                    epsilon = 1e-10
                );
            }
            let bt_b = modes.mode_matrix.transpose() * &modes.mode_matrix;
            assert!((bt_b - DMatrix::identity(n, n)).amax() < 1e-10);
            // Eigenpairs against the independently rebuilt Hessian.
            let a = transverse_hessian(&u, 10.0);
            for m in 0..n {
                let b = modes.mode_matrix.column(m);
                let lambda = modes.frequencies[m].powi(2);
                assert!((&a * b - b * lambda).norm() < 1e-9);
            }
        }
    }

    #[test]
    fn two_ion_rocking_mode_by_hand() {
        let u = equilibrium_positions(2).unwrap();
        let modes = transverse_modes(&u, 10.0).unwrap();
        // [[a²−c, c], [c, a²−c]] with c = 1/d³ has eigenvalues a² and a² − 2c.
        let d = 2.0 * 0.25f64.cbrt();
        let c = 1.0 / (d * d * d);
        assert_abs_diff_eq!(modes.frequencies[1], (100.0 - 2.0 * c).sqrt(), epsilon = 1e-10);
        assert_abs_diff_eq!(c, 0.5, epsilon = 1e-12);
    }

    #[test]
    fn weak_confinement_buckles() {
        let u = equilibrium_positions(10).unwrap();
        match transverse_modes(&u, 1.0) {
            Err(Error::ZigZagInstability { eigenvalue, .. }) => assert!(eigenvalue <= 0.0),
            other => panic!("expected instability, got {other:?}"),
        }
    }

    #[test]
    fn two_ion_coupling_from_modes_closed_form() {
        let w_com = 10.0;
        let w_rock = (100.0f64 - 1.0).sqrt();
        let mu = 10.001;
        let mut trap = TrapSpec::new(2, 10.0, 1.0, 1.0, mu);
        trap.resonance_margin = 1e-5;
        let j = coupling_from_modes(&trap).unwrap();
        let expected = 0.5 / (mu * mu - w_com * w_com) - 0.5 / (mu * mu - w_rock * w_rock);
        assert_abs_diff_eq!(j.get(0, 1), expected, epsilon = 1e-12);
        // The COM term dominates near its resonance.
        let com = 0.5 / (mu * mu - w_com * w_com);
        assert!((j.get(0, 1) - com).abs() < 0.1 * com);
    }

    #[test]
    fn resonance_is_rejected() {
        let trap = TrapSpec::new(4, 10.0, 1.0, 1.0, 10.0 * (1.0 + 1e-4));
        assert!(matches!(
            coupling_from_modes(&trap),
            Err(Error::Resonance { mode: 0, .. })
        ));
    }

    #[test]
    fn couplings_decay_above_all_modes() {
        let trap = TrapSpec::new(10, 10.0, 1.0, 1.0, 10.2);
        let j = coupling_from_modes(&trap).unwrap();
        assert!(j.get(0, 1) > 0.0);
        assert!(j.get(0, 1).abs() >= j.get(0, 9).abs());
    }
}
