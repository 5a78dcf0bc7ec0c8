//! Dynamical diagnostics: Hamming distance, staggered-magnetization QFI,
//! time averages and logarithmic growth rates.

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64;

use crate::ed::{evolve_with, EvolutionOptions, HamiltonianOperator, StateVector};
use crate::error::{invalid, Error, Result};
use crate::stats::{linear_fit, mean_and_stderr, window_indices, LinearFit};

/// z-basis signature `s_i ∈ {±1}` of a product initial state.
#[derive(Debug, Clone, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct InitialPattern {
    signs: Vec<i8>,
}

impl InitialPattern {
    pub fn new(signs: Vec<i8>) -> Result<Self> {
        if signs.iter().any(|&s| s != 1 && s != -1) {
            return Err(invalid("pattern entries must be ±1"));
        }
        Ok(Self { signs })
    }

    /// `+1, −1, +1, …`
    pub fn neel(n: usize) -> Self {
        Self {
            signs: crate::ed::neel_signs(n),
        }
    }

    /// Parses `u`/`d` (or `↑`/`↓`, `+`/`-`) per site.
    pub fn parse(text: &str) -> Result<Self> {
        let signs = text
            .chars()
            .filter(|c| !c.is_whitespace())
            .map(|c| match c {
                'u' | 'U' | '↑' | '+' | '1' => Ok(1),
                'd' | 'D' | '↓' | '-' | '0' => Ok(-1),
                _ => Err(invalid("pattern characters must be u/d")),
            })
            .collect::<Result<Vec<i8>>>()?;
        Self::new(signs)
    }

    pub fn signs(&self) -> &[i8] {
        &self.signs
    }

    pub fn len(&self) -> usize {
        self.signs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.signs.is_empty()
    }

    pub fn flipped(&self) -> Self {
        Self {
            signs: self.signs.iter().map(|s| -s).collect(),
        }
    }

    pub fn state(&self) -> Result<StateVector> {
        StateVector::from_z_signs(&self.signs)
    }

    /// `u`/`d` string form.
    pub fn to_text(&self) -> String {
        self.signs.iter().map(|&s| if s == 1 { 'u' } else { 'd' }).collect()
    }
}

fn check_len(expected: usize, found: usize) -> Result<()> {
    if expected != found {
        return Err(Error::DimensionMismatch { expected, found });
    }
    Ok(())
}

/// `𝒟 = 1/2 − (1/2N) Σ_i s_i ⟨σᶻ_i⟩` from z magnetizations.
pub fn hamming_from_magnetizations(magnetizations: &[f64], pattern: &InitialPattern) -> Result<f64> {
    check_len(pattern.len(), magnetizations.len())?;
    let n = pattern.len() as f64;
    let overlap: f64 = pattern
        .signs()
        .iter()
        .zip(magnetizations)
        .map(|(&s, m)| s as f64 * m)
        .sum();
    Ok(0.5 - overlap / (2.0 * n))
}

/// Normalized Hamming distance of `state` from the z-product state `pattern`.
pub fn hamming_distance(state: &StateVector, pattern: &InitialPattern) -> Result<f64> {
    check_len(pattern.len(), state.n())?;
    hamming_from_magnetizations(&state.z_magnetizations(), pattern)
}

/// `𝒟(t) = 1/2 − (1/2N) Σ_i Re⟨ψ₀|σᶻ_i(t) σᶻ_i(0)|ψ₀⟩` evaluated with the
/// two-time correlator, for any initial state.
pub fn hamming_two_time(
    initial: &StateVector,
    h: &HamiltonianOperator,
    t: f64,
    options: &EvolutionOptions,
) -> Result<f64> {
    let n = initial.n();
    let psi_t = evolve_with(initial, h, t, options)?;
    let mut total = 0.0;
    for i in 0..n {
        // φ = e^{−iHt} σᶻ_i |ψ₀⟩, correlator = ⟨ψ(t)| σᶻ_i |φ⟩
        let flipped: Vec<Complex64> = initial
            .amplitudes()
            .iter()
            .enumerate()
            .map(|(b, a)| if b >> i & 1 == 1 { *a } else { -a })
            .collect();
        let phi = evolve_with(&StateVector::from_raw(n, flipped), h, t, options)?;
        let corr: Complex64 = psi_t
            .amplitudes()
            .iter()
            .zip(phi.amplitudes())
            .enumerate()
            .map(|(b, (a, p))| {
                let z = if b >> i & 1 == 1 { 1.0 } else { -1.0 };
                a.conj() * p * z
            })
            .sum();
        total += corr.re;
    }
    Ok(0.5 - total / (2.0 * n as f64))
}

/// Staggered sign `(−1)^i` for 0-based `site` (site 1 carries −1).
#[inline]
pub fn staggered_sign(site: usize) -> f64 {
    if site % 2 == 0 {
        -1.0
    } else {
        1.0
    }
}

/// `F_Q = Σ_{ij} (−1)^{i+j} ⟨σᶻ_iσᶻ_j⟩ − [Σ_i (−1)^i ⟨σᶻ_i⟩]²` from
/// magnetizations and the row-major `⟨σᶻσᶻ⟩` matrix. Returns `F_Q` (not
/// normalized).
pub fn staggered_fisher_information(magnetizations: &[f64], zz: &[f64]) -> Result<f64> {
    let n = magnetizations.len();
    check_len(n * n, zz.len())?;
    let mut correlated = 0.0;
    for i in 0..n {
        for j in 0..n {
            correlated += staggered_sign(i) * staggered_sign(j) * zz[i * n + j];
        }
    }
    let m: f64 = magnetizations
        .iter()
        .enumerate()
        .map(|(i, z)| staggered_sign(i) * z)
        .sum();
    Ok(correlated - m * m)
}

/// Normalized QFI `f_Q = F_Q / N` of the staggered magnetization generator.
pub fn qfi_staggered(state: &StateVector) -> f64 {
    let n = state.n();
    // F_Q is the variance of Σ_i (−1)^i σᶻ_i, diagonal in the z basis.
    let (mut first, mut second) = (0.0, 0.0);
    for (b, a) in state.amplitudes().iter().enumerate() {
        let p = a.norm_sqr();
        if p == 0.0 {
            continue;
        }
        let m: f64 = (0..n)
            .map(|i| staggered_sign(i) * if b >> i & 1 == 1 { 1.0 } else { -1.0 })
            .sum();
        first += p * m;
        second += p * m * m;
    }
    ((second - first * first) / n as f64).max(0.0)
}

/// Real-valued time series with one or more components per time.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct TimeSeries {
    pub label: String,
    pub times: Vec<f64>,
    /// `values[k]` holds the components at `times[k]`.
    pub values: Vec<Vec<f64>>,
}

impl TimeSeries {
    pub fn new(label: impl Into<String>, times: Vec<f64>, values: Vec<Vec<f64>>) -> Result<Self> {
        if times.len() != values.len() {
            return Err(Error::DimensionMismatch {
                expected: times.len(),
                found: values.len(),
            });
        }
        if times.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(invalid("times must be strictly increasing"));
        }
        if let Some(first) = values.first() {
            if values.iter().any(|v| v.len() != first.len()) {
                return Err(invalid("component count must be constant across the grid"));
            }
        }
        Ok(Self {
            label: label.into(),
            times,
            values,
        })
    }

    pub fn scalar(label: impl Into<String>, times: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        Self::new(label, times, values.into_iter().map(|v| vec![v]).collect())
    }

    pub fn components(&self) -> usize {
        self.values.first().map_or(0, Vec::len)
    }

    pub fn component(&self, c: usize) -> Vec<f64> {
        self.values.iter().map(|v| v[c]).collect()
    }
}

/// Per-component window mean with the standard error across grid points.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct WindowAverage {
    pub mean: Vec<f64>,
    pub stderr: Vec<f64>,
    pub points: usize,
}

/// Averages `series` over grid points with `t_min ≤ t ≤ t_max`.
pub fn time_average(series: &TimeSeries, t_min: f64, t_max: f64) -> Result<WindowAverage> {
    let first = series.times.first().copied().unwrap_or(f64::NAN);
    let last = series.times.last().copied().unwrap_or(f64::NAN);
    if !(t_min <= t_max) || t_min < first || t_max > last {
        return Err(invalid("averaging window is not covered by the time grid"));
    }
    let idx = window_indices(&series.times, t_min, t_max);
    if idx.is_empty() {
        return Err(invalid("no grid points inside the averaging window"));
    }
    let comps = series.components();
    let mut mean = Vec::with_capacity(comps);
    let mut stderr = Vec::with_capacity(comps);
    for c in 0..comps {
        let vals: Vec<f64> = idx.iter().map(|&k| series.values[k][c]).collect();
        let (m, e) = mean_and_stderr(&vals);
        mean.push(m);
        stderr.push(e);
    }
    Ok(WindowAverage {
        mean,
        stderr,
        points: idx.len(),
    })
}

/// Slope of `value` against `ln t` with a 95% confidence interval.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct LogSlope {
    pub slope: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub fit: LinearFit,
    pub points: usize,
}

impl LogSlope {
    pub fn excludes_zero(&self) -> bool {
        self.ci_low > 0.0 || self.ci_high < 0.0
    }
}

/// Least-squares slope of component `component` against `ln t` over grid
/// points in `[t_lo, t_hi]`; needs at least five points.
pub fn log_time_slope(series: &TimeSeries, component: usize, t_lo: f64, t_hi: f64) -> Result<LogSlope> {
    if component >= series.components() {
        return Err(invalid("component out of range"));
    }
    if !(t_lo > 0.0) || !(t_lo < t_hi) {
        return Err(invalid("log-time window must satisfy 0 < t_lo < t_hi"));
    }
    let idx = window_indices(&series.times, t_lo, t_hi);
    if idx.len() < 5 {
        return Err(invalid("log-time slope needs at least five grid points in the window"));
    }
    let xs: Vec<f64> = idx.iter().map(|&k| series.times[k].ln()).collect();
    let ys: Vec<f64> = idx.iter().map(|&k| series.values[k][component]).collect();
    let fit = linear_fit(&xs, &ys).ok_or_else(|| invalid("degenerate regression"))?;
    let (ci_low, ci_high) = if fit.slope_stderr == 0.0 {
        (fit.slope, fit.slope)
    } else {
        fit.slope_interval(0.95)
    };
    Ok(LogSlope {
        slope: fit.slope,
        ci_low,
        ci_high,
        fit,
        points: idx.len(),
    })
}
