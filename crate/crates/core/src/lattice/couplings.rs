use alloc::vec;
use alloc::vec::Vec;


use super::ions::TrapSpec;
use crate::error::{invalid, Result};

/// How a coupling matrix was produced.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(tag = "kind", rename_all = "kebab-case"))]
pub enum Provenance {
    PowerLaw { j_max: f64, alpha: f64 },
    /// Kac-normalized power law; `normalization` is the mean interaction
    /// strength `𝒩` the bare power law was divided by.
    KacPowerLaw { j: f64, alpha: f64, normalization: f64 },
    NormalMode(TrapSpec),
    /// Supplied entry by entry (measured or loaded from a file).
    Explicit,
}

/// Symmetric spin-spin couplings with zero diagonal, stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct CouplingMatrix {
    n: usize,
    values: Vec<f64>,
    provenance: Provenance,
}

impl CouplingMatrix {
    /// Checks exact symmetry and a zero diagonal.
    pub fn from_values(n: usize, values: Vec<f64>, provenance: Provenance) -> Result<Self> {
        if values.len() != n * n {
            return Err(invalid("coupling values must form an n×n matrix"));
        }
        for i in 0..n {
            if values[i * n + i] != 0.0 {
                return Err(invalid("coupling matrix diagonal must be zero"));
            }
            for j in (i + 1)..n {
                let (a, b) = (values[i * n + j], values[j * n + i]);
                if a != b {
                    return Err(invalid("coupling matrix must be exactly symmetric"));
                }
                if !a.is_finite() {
                    return Err(invalid("coupling values must be finite"));
                }
            }
        }
        Ok(Self {
            n,
            values,
            provenance,
        })
    }

    fn from_pair_fn(n: usize, provenance: Provenance, f: impl Fn(usize, usize) -> f64) -> Self {
        let mut values = vec![0.0; n * n];
        for i in 0..n {
            for j in (i + 1)..n {
                let v = f(i, j);
                values[i * n + j] = v;
                values[j * n + i] = v;
            }
        }
        Self {
            n,
            values,
            provenance,
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Coupling between sites `i` and `j` (0-based).
    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.n + j]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn provenance(&self) -> &Provenance {
        &self.provenance
    }

    /// Largest coupling magnitude.
    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Every entry multiplied by `factor`; provenance is kept.
    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            n: self.n,
            values: self.values.iter().map(|v| v * factor).collect(),
            provenance: self.provenance.clone(),
        }
    }

    /// Rescaled so the largest magnitude is one. Returns the matrix and the
    /// scale that was divided out.
    pub fn normalized(&self) -> (Self, f64) {
        let scale = self.max_abs();
        if scale == 0.0 {
            return (self.clone(), 1.0);
        }
        (self.scaled(1.0 / scale), scale)
    }

    /// Pairs `(i, j, J_ij)` with `i < j` and nonzero coupling.
    pub fn bonds(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        let n = self.n;
        (0..n).flat_map(move |i| ((i + 1)..n).map(move |j| (i, j, self.get(i, j))))
            .filter(|&(_, _, v)| v != 0.0)
    }

    /// Coupling matrix of the ions `range`, re-indexed from zero.
    pub fn submatrix(&self, range: core::ops::Range<usize>) -> Result<Self> {
        if range.end > self.n || range.start >= range.end {
            return Err(invalid("submatrix range out of bounds"));
        }
        let m = range.len();
        let mut values = vec![0.0; m * m];
        for (a, i) in range.clone().enumerate() {
            for (b, j) in range.clone().enumerate() {
                values[a * m + b] = self.get(i, j);
            }
        }
        Ok(Self {
            n: m,
            values,
            provenance: self.provenance.clone(),
        })
    }
}

/// `J_ij = j_max / |i − j|^α`.
pub fn power_law_couplings(n: usize, j_max: f64, alpha: f64) -> Result<CouplingMatrix> {
    if !(alpha >= 0.0) || !alpha.is_finite() {
        return Err(invalid("alpha must be nonnegative and finite"));
    }
    if !(j_max > 0.0) || !j_max.is_finite() {
        return Err(invalid("j_max must be positive and finite"));
    }
    Ok(CouplingMatrix::from_pair_fn(
        n,
        Provenance::PowerLaw { j_max, alpha },
        |i, j| j_max / ((j - i) as f64).powf(alpha),
    ))
}

/// Mean interaction strength `𝒩 = (N−1)⁻¹ Σ_{i<j} |i−j|^{−α}`.
pub fn kac_normalization(n: usize, alpha: f64) -> f64 {
    if n < 2 {
        return 1.0;
    }
    // Σ_{i<j} f(j−i) = Σ_d (n−d) f(d)
    let sum: f64 = (1..n)
        .map(|d| (n - d) as f64 * (d as f64).powf(-alpha))
        .sum();
    sum / (n - 1) as f64
}

/// `J_ij = J 𝒩⁻¹ |i−j|^{−α}`.
pub fn kac_normalized_couplings(n: usize, j: f64, alpha: f64) -> Result<CouplingMatrix> {
    if n < 2 {
        return Err(invalid("Kac normalization needs at least two sites"));
    }
    if !(alpha >= 0.0) || !alpha.is_finite() {
        return Err(invalid("alpha must be nonnegative and finite"));
    }
    if !(j > 0.0) || !j.is_finite() {
        return Err(invalid("J must be positive and finite"));
    }
    let normalization = kac_normalization(n, alpha);
    let scale = j / normalization;
    Ok(CouplingMatrix::from_pair_fn(
        n,
        Provenance::KacPowerLaw {
            j,
            alpha,
            normalization,
        },
        |a, b| scale / ((b - a) as f64).powf(alpha),
    ))
}

/// Power-law fit `J(d) ≈ j_max / d^α`.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct AlphaFit {
    pub j_max: f64,
    pub alpha: f64,
}

/// Least squares of `ln J̄(d)` against `ln d`, where `J̄(d)` is the mean
/// coupling over all pairs at distance `d`; each distance carries equal weight.
pub fn fit_alpha(couplings: &CouplingMatrix) -> Result<AlphaFit> {
    let n = couplings.n();
    if n < 3 {
        return Err(invalid("fitting a power law needs at least two distances (n >= 3)"));
    }
    let mut xs = Vec::with_capacity(n - 1);
    let mut ys = Vec::with_capacity(n - 1);
    for d in 1..n {
        let mut sum = 0.0;
        for i in 0..(n - d) {
            let v = couplings.get(i, i + d);
            if !(v > 0.0) {
                return Err(invalid("fit_alpha needs strictly positive couplings"));
            }
            sum += v;
        }
        xs.push((d as f64).ln());
        ys.push((sum / (n - d) as f64).ln());
    }
    let m = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / m;
    let my = ys.iter().sum::<f64>() / m;
    let (mut sxy, mut sxx) = (0.0, 0.0);
    for (x, y) in xs.iter().zip(&ys) {
        sxy += (x - mx) * (y - my);
        sxx += (x - mx) * (x - mx);
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    Ok(AlphaFit {
        j_max: intercept.exp(),
        alpha: -slope,
    })
}

/// [`fit_alpha`] on the interior of the chain with `trim` ions removed from
/// each end.
pub fn fit_alpha_trimmed(couplings: &CouplingMatrix, trim: usize) -> Result<AlphaFit> {
    let n = couplings.n();
    if 2 * trim >= n {
        return Err(invalid("trim removes the whole chain"));
    }
    fit_alpha(&couplings.submatrix(trim..n - trim)?)
}
