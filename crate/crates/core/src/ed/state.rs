use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64;

use crate::error::{invalid, Error, Result};

/// Pauli axis.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "lowercase"))]
pub enum Axis {
    X,
    Y,
    Z,
}

/// One site of a product state: spin up or down along `axis`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SiteState {
    pub axis: Axis,
    pub up: bool,
}

impl SiteState {
    pub const fn z(up: bool) -> Self {
        Self { axis: Axis::Z, up }
    }

    pub const fn x(up: bool) -> Self {
        Self { axis: Axis::X, up }
    }

    /// Amplitudes on (|↓⟩, |↑⟩) in the z basis.
    fn amplitudes(self) -> [Complex64; 2] {
        let h = core::f64::consts::FRAC_1_SQRT_2;
        let (zero, one) = (Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0));
        match (self.axis, self.up) {
            (Axis::Z, true) => [zero, one],
            (Axis::Z, false) => [one, zero],
            // |±x⟩ = (|↑⟩ ± |↓⟩)/√2
            (Axis::X, true) => [Complex64::new(h, 0.0), Complex64::new(h, 0.0)],
            (Axis::X, false) => [Complex64::new(-h, 0.0), Complex64::new(h, 0.0)],
            // |±y⟩ = (|↑⟩ ± i|↓⟩)/√2
            (Axis::Y, true) => [Complex64::new(0.0, h), Complex64::new(h, 0.0)],
            (Axis::Y, false) => [Complex64::new(0.0, -h), Complex64::new(h, 0.0)],
        }
    }
}

/// Pure state of `n` spins in the z-product basis.
///
/// Site `i` (0-based) is bit `i` of the basis index; a set bit is spin up,
/// `σᶻ = +1`.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    n: usize,
    amplitudes: Vec<Complex64>,
}

/// Largest chain a state vector may describe.
pub const MAX_STATE_SITES: usize = 26;

#[inline]
pub(crate) fn z_value(basis: usize, site: usize) -> f64 {
    if basis >> site & 1 == 1 {
        1.0
    } else {
        -1.0
    }
}

impl StateVector {
    /// Wraps amplitudes that are already normalized to 1e-10.
    pub fn from_amplitudes(n: usize, amplitudes: Vec<Complex64>) -> Result<Self> {
        if n > MAX_STATE_SITES {
            return Err(Error::Capacity {
                n,
                cap: MAX_STATE_SITES,
            });
        }
        if amplitudes.len() != 1 << n {
            return Err(Error::DimensionMismatch {
                expected: 1 << n,
                found: amplitudes.len(),
            });
        }
        let s = Self { n, amplitudes };
        let norm = s.norm();
        if (norm * norm - 1.0).abs() > 1e-10 {
            return Err(invalid("state vector is not normalized"));
        }
        Ok(s)
    }

    /// Normalizes arbitrary nonzero amplitudes.
    pub fn normalized(n: usize, mut amplitudes: Vec<Complex64>) -> Result<Self> {
        if amplitudes.len() != 1 << n {
            return Err(Error::DimensionMismatch {
                expected: 1 << n,
                found: amplitudes.len(),
            });
        }
        let norm = amplitudes.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        if !(norm > 0.0) {
            return Err(invalid("cannot normalize a zero vector"));
        }
        for a in &mut amplitudes {
            *a /= norm;
        }
        Self::from_amplitudes(n, amplitudes)
    }

    pub(crate) fn from_raw(n: usize, amplitudes: Vec<Complex64>) -> Self {
        debug_assert_eq!(amplitudes.len(), 1 << n);
        Self { n, amplitudes }
    }

    /// The basis state with index `basis`.
    pub fn basis(n: usize, basis: usize) -> Result<Self> {
        if basis >= 1 << n {
            return Err(invalid("basis index out of range"));
        }
        let mut amps = vec![Complex64::new(0.0, 0.0); 1 << n];
        amps[basis] = Complex64::new(1.0, 0.0);
        Self::from_amplitudes(n, amps)
    }

    /// z-product state with `σᶻ_i = signs[i]`.
    pub fn from_z_signs(signs: &[i8]) -> Result<Self> {
        let mut index = 0usize;
        for (i, &s) in signs.iter().enumerate() {
            match s {
                1 => index |= 1 << i,
                -1 => {}
                _ => return Err(invalid("z signs must be ±1")),
            }
        }
        Self::basis(signs.len(), index)
    }

    /// Néel state `|↑↓↑↓…⟩_z`, first site up.
    pub fn neel(n: usize) -> Result<Self> {
        Self::from_z_signs(&neel_signs(n))
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn norm(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }

    /// `⟨self|other⟩`.
    pub fn inner(&self, other: &Self) -> Complex64 {
        self.amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| a.conj() * b)
            .sum()
    }

    /// Euclidean distance `‖self − other‖`.
    pub fn distance(&self, other: &Self) -> f64 {
        self.amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| (a - b).norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    fn check_site(&self, site: usize) -> Result<()> {
        if site >= self.n {
            return Err(invalid("site index out of range"));
        }
        Ok(())
    }

    /// `⟨σ^axis_site⟩`.
    pub fn expectation_pauli(&self, site: usize, axis: Axis) -> Result<f64> {
        self.check_site(site)?;
        let bit = 1usize << site;
        let psi = &self.amplitudes;
        let value = match axis {
            Axis::Z => psi
                .iter()
                .enumerate()
                .map(|(b, a)| z_value(b, site) * a.norm_sqr())
                .sum(),
            // σˣ|b⟩ = |b ^ bit⟩
            Axis::X => psi
                .iter()
                .enumerate()
                .map(|(b, a)| (a.conj() * psi[b ^ bit]).re)
                .sum(),
            // σʸ|↑⟩ = i|↓⟩, σʸ|↓⟩ = −i|↑⟩
            Axis::Y => psi
                .iter()
                .enumerate()
                .map(|(b, a)| {
                    let partner = psi[b ^ bit];
                    // (σʸψ)_b: b up ⇐ from down partner with −i; b down ⇐ from up with +i
                    let s = if b & bit != 0 {
                        Complex64::new(0.0, -1.0)
                    } else {
                        Complex64::new(0.0, 1.0)
                    };
                    (a.conj() * s * partner).re
                })
                .sum(),
        };
        Ok(value)
    }

    /// `⟨σᶻ_i⟩` for every site at once.
    pub fn z_magnetizations(&self) -> Vec<f64> {
        let mut m = vec![0.0; self.n];
        for (b, a) in self.amplitudes.iter().enumerate() {
            let p = a.norm_sqr();
            for (i, mi) in m.iter_mut().enumerate() {
                *mi += z_value(b, i) * p;
            }
        }
        m
    }

    /// `⟨σᶻ_i σᶻ_j⟩`; equals 1 when `i == j`.
    pub fn zz_correlator(&self, i: usize, j: usize) -> Result<f64> {
        self.check_site(i)?;
        self.check_site(j)?;
        if i == j {
            return Ok(1.0);
        }
        Ok(self
            .amplitudes
            .iter()
            .enumerate()
            .map(|(b, a)| z_value(b, i) * z_value(b, j) * a.norm_sqr())
            .sum())
    }

    /// Full matrix of `⟨σᶻ_i σᶻ_j⟩`, row-major `n × n`.
    pub fn zz_matrix(&self) -> Vec<f64> {
        let n = self.n;
        let mut c = vec![0.0; n * n];
        for (b, a) in self.amplitudes.iter().enumerate() {
            let p = a.norm_sqr();
            if p == 0.0 {
                continue;
            }
            for i in 0..n {
                let zi = z_value(b, i);
                for j in (i + 1)..n {
                    c[i * n + j] += zi * z_value(b, j) * p;
                }
            }
        }
        for i in 0..n {
            c[i * n + i] = 1.0;
            for j in (i + 1)..n {
                c[j * n + i] = c[i * n + j];
            }
        }
        c
    }

    /// Single-site reduced density matrix by explicit partial trace.
    pub fn reduced_density_matrix(&self, site: usize) -> Result<ReducedDensityMatrix> {
        self.check_site(site)?;
        let bit = 1usize << site;
        let zero = Complex64::new(0.0, 0.0);
        let (mut up, mut down, mut coherence) = (0.0, 0.0, zero);
        for (b, a) in self.amplitudes.iter().enumerate() {
            if b & bit != 0 {
                up += a.norm_sqr();
                // ρ_{↑↓} = Σ_rest ψ(↑, rest) ψ*(↓, rest)
                coherence += a * self.amplitudes[b ^ bit].conj();
            } else {
                down += a.norm_sqr();
            }
        }
        Ok(ReducedDensityMatrix {
            site,
            entries: [
                [Complex64::new(up, 0.0), coherence],
                [coherence.conj(), Complex64::new(down, 0.0)],
            ],
        })
    }

    /// Tensor product of single-site states, `pattern[i]` on site `i`.
    pub fn product_state(pattern: &[SiteState]) -> Result<Self> {
        let n = pattern.len();
        if n > MAX_STATE_SITES {
            return Err(Error::Capacity {
                n,
                cap: MAX_STATE_SITES,
            });
        }
        let mut amps = vec![Complex64::new(1.0, 0.0)];
        for (i, site) in pattern.iter().enumerate() {
            let [down, up] = site.amplitudes();
            let mut next = vec![Complex64::new(0.0, 0.0); 1 << (i + 1)];
            for (b, a) in amps.iter().enumerate() {
                next[b] = a * down;
                next[b | 1 << i] = a * up;
            }
            amps = next;
        }
        Self::from_amplitudes(n, amps)
    }
}

/// Néel signature `+1, −1, +1, …`.
pub fn neel_signs(n: usize) -> Vec<i8> {
    (0..n).map(|i| if i % 2 == 0 { 1 } else { -1 }).collect()
}

/// 2×2 density matrix of one spin in the (|↑⟩, |↓⟩) basis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReducedDensityMatrix {
    pub site: usize,
    pub entries: [[Complex64; 2]; 2],
}

impl ReducedDensityMatrix {
    /// The maximally mixed state.
    pub fn maximally_mixed(site: usize) -> Self {
        let half = Complex64::new(0.5, 0.0);
        let zero = Complex64::new(0.0, 0.0);
        Self {
            site,
            entries: [[half, zero], [zero, half]],
        }
    }

    /// `(I + xσˣ + yσʸ + zσᶻ)/2`.
    pub fn from_bloch(site: usize, x: f64, y: f64, z: f64) -> Self {
        let off = Complex64::new(x / 2.0, -y / 2.0);
        Self {
            site,
            entries: [
                [Complex64::new((1.0 + z) / 2.0, 0.0), off],
                [off.conj(), Complex64::new((1.0 - z) / 2.0, 0.0)],
            ],
        }
    }

    pub fn trace(&self) -> f64 {
        self.entries[0][0].re + self.entries[1][1].re
    }

    /// `(⟨σˣ⟩, ⟨σʸ⟩, ⟨σᶻ⟩)`.
    pub fn bloch(&self) -> [f64; 3] {
        let c = self.entries[0][1];
        [2.0 * c.re, -2.0 * c.im, self.entries[0][0].re - self.entries[1][1].re]
    }

    /// Eigenvalues, ascending.
    pub fn eigenvalues(&self) -> [f64; 2] {
        let a = self.entries[0][0].re;
        let d = self.entries[1][1].re;
        let m = (a + d) / 2.0;
        let r = (((a - d) / 2.0).powi(2) + self.entries[0][1].norm_sqr()).sqrt();
        [m - r, m + r]
    }

    pub fn trace_distance(&self, other: &Self) -> f64 {
        let da = self.entries[0][0].re - other.entries[0][0].re;
        let dd = self.entries[1][1].re - other.entries[1][1].re;
        let db = self.entries[0][1] - other.entries[0][1];
        let m = (da + dd) / 2.0;
        let r = (((da - dd) / 2.0).powi(2) + db.norm_sqr()).sqrt();
        ((m - r).abs() + (m + r).abs()) / 2.0
    }

    /// Entrywise weighted sum, used for time and ensemble averages.
    pub fn weighted_sum<'a>(site: usize, items: impl IntoIterator<Item = (f64, &'a Self)>) -> Self {
        let zero = Complex64::new(0.0, 0.0);
        let mut entries = [[zero; 2]; 2];
        for (w, rho) in items {
            for r in 0..2 {
                for c in 0..2 {
                    entries[r][c] += rho.entries[r][c] * w;
                }
            }
        }
        Self { site, entries }
    }
}
