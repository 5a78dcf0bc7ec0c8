//! Level statistics and thermal (ETH) predictions.

use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64;

use crate::ed::{ReducedDensityMatrix, SpectralDecomposition};
use crate::error::{invalid, Error, Result};
use crate::stats::chi_square_p_value;

/// Gaps `δ_n = E_{n+1} − E_n` of an ascending spectrum.
pub fn level_spacings(eigenvalues: &[f64]) -> Result<Vec<f64>> {
    if eigenvalues.windows(2).any(|w| w[1] < w[0]) {
        return Err(invalid("eigenvalues must be sorted ascending"));
    }
    Ok(eigenvalues.windows(2).map(|w| w[1] - w[0]).collect())
}

/// Adjacent-gap ratios of one spectrum.
#[derive(Debug, Clone, PartialEq)]
pub struct GapRatios {
    pub ratios: Vec<f64>,
    pub mean: f64,
    /// Pairs skipped because both gaps vanish relative to the spectral width.
    pub skipped: usize,
}

/// `r_n = min(δ_n, δ_{n−1}) / max(δ_n, δ_{n−1})`; pairs with
/// `max < 1e-12 · width` are skipped.
pub fn r_statistic(eigenvalues: &[f64]) -> Result<GapRatios> {
    if eigenvalues.len() < 3 {
        return Err(invalid("the gap ratio needs at least three levels"));
    }
    let gaps = level_spacings(eigenvalues)?;
    let width = eigenvalues[eigenvalues.len() - 1] - eigenvalues[0];
    let floor = 1e-12 * width;
    let mut ratios = Vec::with_capacity(gaps.len() - 1);
    let mut skipped = 0;
    for w in gaps.windows(2) {
        let (lo, hi) = if w[0] <= w[1] { (w[0], w[1]) } else { (w[1], w[0]) };
        if hi < floor || hi == 0.0 {
            skipped += 1;
            continue;
        }
        ratios.push(lo / hi);
    }
    let mean = if ratios.is_empty() {
        f64::NAN
    } else {
        ratios.iter().sum::<f64>() / ratios.len() as f64
    };
    Ok(GapRatios {
        ratios,
        mean,
        skipped,
    })
}

/// Pooled level statistics over many spectra.
#[derive(Debug, Clone, Default, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SpacingEnsemble {
    /// Spacings rescaled by the mean spacing of their own spectrum.
    pub spacings: Vec<f64>,
    pub r_values: Vec<f64>,
    /// Mean gap ratio of each realization.
    pub realization_means: Vec<f64>,
    pub realization_count: usize,
    pub skipped: usize,
}

impl SpacingEnsemble {
    pub fn new() -> Self {
        Self::default()
    }

    /// Adds one realization, given as one or more independent spectra
    /// (symmetry sectors are passed separately).
    pub fn add_realization(&mut self, spectra: &[&[f64]]) -> Result<()> {
        let mut ratios = Vec::new();
        for spectrum in spectra {
            let r = r_statistic(spectrum)?;
            self.skipped += r.skipped;
            ratios.extend_from_slice(&r.ratios);
            let gaps = level_spacings(spectrum)?;
            let mean = gaps.iter().sum::<f64>() / gaps.len() as f64;
            if mean > 0.0 {
                self.spacings.extend(gaps.iter().map(|g| g / mean));
            }
        }
        if !ratios.is_empty() {
            self.realization_means
                .push(ratios.iter().sum::<f64>() / ratios.len() as f64);
        }
        self.r_values.extend(ratios);
        self.realization_count += 1;
        Ok(())
    }

    /// Mean over all pooled ratios.
    pub fn mean_r(&self) -> f64 {
        self.r_values.iter().sum::<f64>() / self.r_values.len() as f64
    }
}

/// Density histogram of rescaled spacings against the Poisson law `e^{−s}`.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SpacingHistogram {
    pub edges: Vec<f64>,
    pub counts: Vec<u64>,
    pub density: Vec<f64>,
    /// `e^{−s}` at the bin centers.
    pub poisson: Vec<f64>,
    /// Samples beyond the last edge.
    pub overflow: u64,
    pub total: u64,
}

/// χ² goodness of fit of a histogram against `e^{−s}`.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ChiSquare {
    pub statistic: f64,
    pub dof: usize,
    pub p_value: f64,
}

pub fn spacing_histogram(spacings: &[f64], bins: usize, s_max: f64) -> Result<SpacingHistogram> {
    if bins == 0 || !(s_max > 0.0) {
        return Err(invalid("histogram needs bins > 0 and s_max > 0"));
    }
    let width = s_max / bins as f64;
    let edges: Vec<f64> = (0..=bins).map(|k| k as f64 * width).collect();
    let mut counts = vec![0u64; bins];
    let mut overflow = 0;
    for &s in spacings {
        if s < 0.0 {
            return Err(invalid("negative spacing"));
        }
        let k = (s / width) as usize;
        if k < bins {
            counts[k] += 1;
        } else {
            overflow += 1;
        }
    }
    let total = spacings.len() as u64;
    let density = counts
        .iter()
        .map(|&c| c as f64 / (total.max(1) as f64 * width))
        .collect();
    let poisson = (0..bins).map(|k| (-(k as f64 + 0.5) * width).exp()).collect();
    Ok(SpacingHistogram {
        edges,
        counts,
        density,
        poisson,
        overflow,
        total,
    })
}

impl SpacingHistogram {
    /// Pearson χ² against exact bin probabilities of `e^{−s}` (overflow bin
    /// included); adjacent bins are merged until each expects at least five
    /// counts.
    pub fn chi_square_poisson(&self) -> ChiSquare {
        let total = self.total as f64;
        let mut cells: Vec<(f64, f64)> = Vec::new();
        let (mut obs, mut exp) = (0.0, 0.0);
        for (k, &c) in self.counts.iter().enumerate() {
            obs += c as f64;
            exp += total * ((-self.edges[k]).exp() - (-self.edges[k + 1]).exp());
            if exp >= 5.0 {
                cells.push((obs, exp));
                obs = 0.0;
                exp = 0.0;
            }
        }
        obs += self.overflow as f64;
        exp += total * (-self.edges[self.edges.len() - 1]).exp();
        match cells.last_mut() {
            Some(last) if exp < 5.0 => {
                last.0 += obs;
                last.1 += exp;
            }
            _ => cells.push((obs, exp)),
        }
        let statistic = cells.iter().map(|(o, e)| (o - e) * (o - e) / e).sum();
        let dof = cells.len().saturating_sub(1).max(1);
        ChiSquare {
            statistic,
            dof,
            p_value: chi_square_p_value(statistic, dof),
        }
    }
}

/// Canonical energy `Tr[H e^{−βH}] / Tr[e^{−βH}]`.
pub fn thermal_energy(eigenvalues: &[f64], beta: f64) -> f64 {
    let reference = if beta >= 0.0 {
        eigenvalues.iter().copied().fold(f64::INFINITY, f64::min)
    } else {
        eigenvalues.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    };
    let (mut z, mut e) = (0.0, 0.0);
    for &ev in eigenvalues {
        let w = (-beta * (ev - reference)).exp();
        z += w;
        e += w * ev;
    }
    e / z
}

/// Inverse temperature at which the canonical energy equals `energy`.
///
/// `E(β)` is strictly decreasing; the root is bracketed by doubling and found
/// by bisection. Returns exactly zero when `energy` is the infinite-temperature
/// energy to within `1e-10` of the spectral width.
pub fn eth_beta(eigenvalues: &[f64], energy: f64) -> Result<f64> {
    if eigenvalues.len() < 2 {
        return Err(invalid("need at least two levels"));
    }
    let min = eigenvalues.iter().copied().fold(f64::INFINITY, f64::min);
    let max = eigenvalues.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let width = max - min;
    if !(energy > min && energy < max) {
        return Err(Error::NoFiniteBeta { energy, min, max });
    }
    let tolerance = 1e-10 * width;
    let e0 = thermal_energy(eigenvalues, 0.0);
    if (e0 - energy).abs() <= tolerance {
        return Ok(0.0);
    }
    let sign = if energy < e0 { 1.0 } else { -1.0 };
    // Bracket on a doubling grid, checking monotonicity as we go.
    let mut lo = 0.0;
    let mut e_lo = e0;
    let mut hi = 1.0 / width;
    let limit = 1e6 / width;
    loop {
        let e_hi = thermal_energy(eigenvalues, sign * hi);
        if sign * (e_hi - e_lo) > 1e-12 * width {
            return Err(Error::NonConvergence {
                what: "thermal energy is not monotone in beta",
                iterations: 0,
                residual: e_hi - e_lo,
            });
        }
        if sign * (e_hi - energy) <= 0.0 {
            break;
        }
        lo = hi;
        e_lo = e_hi;
        hi *= 2.0;
        if hi > limit {
            return Err(Error::NoFiniteBeta { energy, min, max });
        }
    }
    let mut residual = f64::INFINITY;
    let mut mid = 0.5 * (lo + hi);
    for _ in 0..300 {
        mid = 0.5 * (lo + hi);
        let e = thermal_energy(eigenvalues, sign * mid);
        residual = e - energy;
        if residual.abs() <= 1e-3 * tolerance {
            break;
        }
        if sign * residual > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= f64::EPSILON * hi {
            break;
        }
    }
    if residual.abs() > tolerance {
        return Err(Error::NonConvergence {
            what: "inverse-temperature bisection",
            iterations: 300,
            residual,
        });
    }
    Ok(sign * mid)
}

/// Thermal single-site density matrix at inverse temperature `beta`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThermalPrediction {
    pub beta: f64,
    pub rdm: ReducedDensityMatrix,
}

/// `ρ_A = Tr_B[e^{−βH}] / Tr[e^{−βH}]` on `site`, from the eigenpairs.
pub fn eth_rdm(spectrum: &SpectralDecomposition, beta: f64, site: usize) -> Result<ThermalPrediction> {
    if !beta.is_finite() {
        return Err(invalid("beta must be finite"));
    }
    let dim = spectrum.dim();
    if dim < 2 || !dim.is_power_of_two() || site >= dim.trailing_zeros() as usize {
        return Err(invalid("site out of range for this spectrum"));
    }
    if beta == 0.0 {
        // Tr_B of the identity.
        return Ok(ThermalPrediction {
            beta,
            rdm: ReducedDensityMatrix::maximally_mixed(site),
        });
    }
    let e = &spectrum.eigenvalues;
    let reference = if beta > 0.0 { e[0] } else { e[dim - 1] };
    let weights: Vec<f64> = e.iter().map(|ev| (-beta * (ev - reference)).exp()).collect();
    let z: f64 = weights.iter().sum();
    let bit = 1usize << site;
    let (mut up, mut down, mut coherence) = (0.0, 0.0, 0.0);
    for (k, &w) in weights.iter().enumerate() {
        let p = w / z;
        if p < 1e-300 {
            continue;
        }
        let v = spectrum.eigenvectors.column(k);
        let (mut u, mut d, mut c) = (0.0, 0.0, 0.0);
        for b in 0..dim {
            let x = v[b];
            if b & bit != 0 {
                u += x * x;
                c += x * v[b ^ bit];
            } else {
                d += x * x;
            }
        }
        up += p * u;
        down += p * d;
        coherence += p * c;
    }
    let c = Complex64::new(coherence, 0.0);
    Ok(ThermalPrediction {
        beta,
        rdm: ReducedDensityMatrix {
            site,
            entries: [[Complex64::new(up, 0.0), c], [c, Complex64::new(down, 0.0)]],
        },
    })
}
