//! Experiment configuration (TOML) and named presets.

use std::path::{Path, PathBuf};

use mbl_core::ed::{EvolutionMethod, EvolutionOptions, DEFAULT_ED_CAP};
use mbl_core::observables::InitialPattern;
use mbl_core::Error as CoreError;
use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};
use crate::model::CouplingRecipe;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Engine {
    #[default]
    Ed,
    FreeFermion,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Observable {
    /// `⟨σᶻ_i⟩` per site.
    Magnetization,
    Hamming,
    /// Normalized staggered QFI `f_Q`.
    Qfi,
    /// `(⟨σˣ_i⟩, ⟨σʸ_i⟩, ⟨σᶻ_i⟩)` per site, i.e. every single-site RDM.
    Bloch,
}

impl Observable {
    pub fn label(self) -> &'static str {
        match self {
            Observable::Magnetization => "magnetization",
            Observable::Hamming => "hamming",
            Observable::Qfi => "qfi",
            Observable::Bloch => "bloch",
        }
    }

    pub fn component_labels(self, n: usize) -> Vec<String> {
        let l = self.label();
        match self {
            Observable::Hamming | Observable::Qfi => vec![l.to_string()],
            Observable::Magnetization => (1..=n).map(|i| format!("{l}_{i}")).collect(),
            Observable::Bloch => (1..=n)
                .flat_map(|i| ["x", "y", "z"].map(|a| format!("{l}_{a}{i}")))
                .collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum TimeGrid {
    /// `points` log-spaced times on `[t_min, t_max]`, optionally preceded by 0.
    Log {
        t_min: f64,
        t_max: f64,
        points: usize,
        #[serde(default = "yes")]
        include_zero: bool,
    },
    Explicit {
        times: Vec<f64>,
    },
}

fn yes() -> bool {
    true
}

impl Default for TimeGrid {
    fn default() -> Self {
        TimeGrid::Log {
            t_min: 0.01,
            t_max: 10.0,
            points: 50,
            include_zero: true,
        }
    }
}

impl TimeGrid {
    pub fn times(&self) -> Result<Vec<f64>> {
        let times = match *self {
            TimeGrid::Log {
                t_min,
                t_max,
                points,
                include_zero,
            } => {
                if !(t_min > 0.0 && t_min < t_max && t_max.is_finite()) || points < 2 {
                    return Err(LabError::config("log grid needs 0 < t_min < t_max and at least 2 points"));
                }
                let ratio = (t_max / t_min).ln();
                let mut out = Vec::with_capacity(points + 1);
                if include_zero {
                    out.push(0.0);
                }
                for k in 0..points {
                    out.push(if k + 1 == points {
                        t_max
                    } else {
                        t_min * (ratio * k as f64 / (points - 1) as f64).exp()
                    });
                }
                out
            }
            TimeGrid::Explicit { ref times } => times.clone(),
        };
        if times.is_empty() || times[0] < 0.0 || times.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(LabError::config("time grid must be nonnegative and strictly increasing"));
        }
        Ok(times)
    }
}

/// Windows used for derived scalars.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Analysis {
    #[serde(default = "steady_default")]
    pub steady_window: [f64; 2],
    #[serde(default = "slope_default")]
    pub slope_window: [f64; 2],
}

fn steady_default() -> [f64; 2] {
    [5.0, 10.0]
}

fn slope_default() -> [f64; 2] {
    [1.0, 10.0]
}

impl Default for Analysis {
    fn default() -> Self {
        Self {
            steady_window: steady_default(),
            slope_window: slope_default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LevelStatsConfig {
    /// Treat the two parity sectors as separate spectra.
    #[serde(default)]
    pub resolve_parity: bool,
    #[serde(default = "bins_default")]
    pub bins: usize,
    #[serde(default = "s_max_default")]
    pub s_max: f64,
}

fn bins_default() -> usize {
    40
}

fn s_max_default() -> f64 {
    4.0
}

impl Default for LevelStatsConfig {
    fn default() -> Self {
        Self {
            resolve_parity: false,
            bins: bins_default(),
            s_max: s_max_default(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SweepAxis {
    W,
    Alpha,
    B,
    N,
}

impl SweepAxis {
    pub fn name(self) -> &'static str {
        match self {
            SweepAxis::W => "w",
            SweepAxis::Alpha => "alpha",
            SweepAxis::B => "b",
            SweepAxis::N => "n",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    pub axis: SweepAxis,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelRecipe {
    pub n: usize,
    pub couplings: CouplingRecipe,
    pub field_b: f64,
    /// Disorder half-width; resampled per realization.
    pub w: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EvolutionSettings {
    #[serde(default = "spectral_max_default")]
    pub spectral_max_n: usize,
    #[serde(default = "krylov_tol_default")]
    pub krylov_tolerance: f64,
}

fn spectral_max_default() -> usize {
    EvolutionOptions::default().spectral_max_n
}

fn krylov_tol_default() -> f64 {
    EvolutionOptions::default().krylov_tolerance
}

impl Default for EvolutionSettings {
    fn default() -> Self {
        Self {
            spectral_max_n: spectral_max_default(),
            krylov_tolerance: krylov_tol_default(),
        }
    }
}

impl EvolutionSettings {
    pub fn options(&self) -> EvolutionOptions {
        EvolutionOptions {
            method: EvolutionMethod::Auto,
            spectral_max_n: self.spectral_max_n,
            krylov_tolerance: self.krylov_tolerance,
            ..EvolutionOptions::default()
        }
    }
}

fn neel() -> String {
    "neel".into()
}

fn thirty() -> usize {
    30
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub name: String,
    pub model: ModelRecipe,
    /// `"neel"` or a z pattern such as `"uddu"`.
    #[serde(default = "neel")]
    pub initial: String,
    #[serde(default)]
    pub time: TimeGrid,
    #[serde(default = "thirty")]
    pub realizations: usize,
    #[serde(default)]
    pub master_seed: u64,
    #[serde(default)]
    pub engine: Engine,
    #[serde(default)]
    pub observables: Vec<Observable>,
    #[serde(default)]
    pub analysis: Analysis,
    #[serde(default)]
    pub evolution: EvolutionSettings,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub level_stats: Option<LevelStatsConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<PathBuf>,
}

impl ExperimentConfig {
    pub fn new(name: impl Into<String>, model: ModelRecipe) -> Self {
        Self {
            name: name.into(),
            model,
            initial: neel(),
            time: TimeGrid::default(),
            realizations: thirty(),
            master_seed: 0,
            engine: Engine::Ed,
            observables: Vec::new(),
            analysis: Analysis::default(),
            evolution: EvolutionSettings::default(),
            level_stats: None,
            sweep: None,
            output: None,
        }
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        Ok(toml::from_str(text)?)
    }

    pub fn to_toml(&self) -> Result<String> {
        Ok(toml::to_string(self)?)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| LabError::io(path, e))?;
        Self::from_toml(&text)
    }

    pub fn pattern(&self) -> Result<InitialPattern> {
        let p = if self.initial.eq_ignore_ascii_case("neel") {
            InitialPattern::neel(self.model.n)
        } else {
            InitialPattern::parse(&self.initial)?
        };
        if p.len() != self.model.n {
            return Err(LabError::config(format!(
                "initial pattern has {} sites, model has {}",
                p.len(),
                self.model.n
            )));
        }
        Ok(p)
    }

    /// Checks a single (non-sweep) point.
    pub fn validate(&self) -> Result<()> {
        let n = self.model.n;
        if n == 0 {
            return Err(LabError::config("n must be at least 1"));
        }
        if self.realizations == 0 {
            return Err(LabError::config("realizations must be at least 1"));
        }
        if !(self.model.w >= 0.0) || !self.model.field_b.is_finite() {
            return Err(LabError::config("w must be nonnegative and b finite"));
        }
        if self.engine == Engine::Ed && n > DEFAULT_ED_CAP {
            return Err(CoreError::Capacity { n, cap: DEFAULT_ED_CAP }.into());
        }
        if self.engine == Engine::FreeFermion {
            if self.observables.contains(&Observable::Bloch) {
                return Err(LabError::config("bloch is not available from the free-fermion engine"));
            }
            if self.level_stats.is_some() {
                return Err(LabError::config("level statistics need the ed engine"));
            }
        }
        let mut seen = self.observables.clone();
        seen.sort();
        seen.dedup();
        if seen.len() != self.observables.len() {
            return Err(LabError::config("observables listed twice"));
        }
        self.pattern()?;
        let times = self.time.times()?;
        for (name, [lo, hi]) in [
            ("steady_window", self.analysis.steady_window),
            ("slope_window", self.analysis.slope_window),
        ] {
            if !(lo <= hi) || lo < 0.0 {
                return Err(LabError::config(format!("{name} must satisfy 0 ≤ lo ≤ hi")));
            }
        }
        if !self.observables.is_empty() && self.analysis.steady_window[1] > *times.last().unwrap() {
            return Err(LabError::config("steady_window extends past the time grid"));
        }
        if let Some(ls) = &self.level_stats {
            if ls.bins == 0 || !(ls.s_max > 0.0) {
                return Err(LabError::config("level_stats needs bins > 0 and s_max > 0"));
            }
        }
        Ok(())
    }

    /// The single-point configuration at `value` along `axis`.
    pub fn at(&self, axis: SweepAxis, value: f64) -> Result<Self> {
        let mut c = self.clone();
        c.sweep = None;
        match axis {
            SweepAxis::W => c.model.w = value,
            SweepAxis::B => c.model.field_b = value,
            SweepAxis::Alpha => c.model.couplings = c.model.couplings.with_alpha(value)?,
            SweepAxis::N => {
                if !(value >= 1.0 && value.fract() == 0.0) {
                    return Err(LabError::config("n sweep values must be positive integers"));
                }
                c.model.n = value as usize;
            }
        }
        Ok(c)
    }

    /// One configuration per sweep value, or just `self`.
    pub fn points(&self) -> Result<Vec<Self>> {
        match &self.sweep {
            None => Ok(vec![self.clone()]),
            Some(s) if s.values.is_empty() => Err(LabError::config("sweep has no values")),
            Some(s) => s.values.iter().map(|&v| self.at(s.axis, v)).collect(),
        }
    }
}

fn recipe(n: usize, couplings: CouplingRecipe, field_b: f64, w: f64) -> ModelRecipe {
    ModelRecipe {
        n,
        couplings,
        field_b,
        w,
    }
}

fn power_law(alpha: f64) -> CouplingRecipe {
    CouplingRecipe::PowerLaw { j_max: 1.0, alpha }
}

fn kac(alpha: f64) -> CouplingRecipe {
    CouplingRecipe::Kac { j: 1.0, alpha }
}

fn long_grid() -> TimeGrid {
    TimeGrid::Log {
        t_min: 0.01,
        t_max: 100.0,
        points: 80,
        include_zero: true,
    }
}

pub const PRESETS: &[&str] = &[
    "level-stats",
    "thermal",
    "disorder-sweep",
    "range-sweep",
    "qfi-growth",
    "alpha3-ed",
    "alpha3-free-fermion-n14",
    "alpha3-free-fermion-n100",
    "kac-n12-reduced",
    "field-sweep-level-stats",
];

/// Named starting points for the standard experiments.
pub fn preset(name: &str) -> Option<ExperimentConfig> {
    use Observable::*;
    let dynamics = vec![Magnetization, Hamming, Qfi];
    let mut c = match name {
        "level-stats" => {
            let mut c = ExperimentConfig::new(name, recipe(10, power_law(1.13), 4.0, 8.0));
            c.realizations = 500;
            c.level_stats = Some(LevelStatsConfig::default());
            c
        }
        "thermal" => {
            let mut c = ExperimentConfig::new(name, recipe(10, power_law(1.13), 4.0, 0.0));
            c.realizations = 1;
            c.observables = vec![Magnetization, Hamming, Qfi, Bloch];
            c
        }
        "disorder-sweep" => {
            let mut c = ExperimentConfig::new(name, recipe(10, power_law(1.13), 4.0, 0.0));
            c.observables = dynamics;
            c.sweep = Some(SweepSpec {
                axis: SweepAxis::W,
                values: vec![0.0, 2.0, 4.0, 6.0, 8.0],
            });
            c
        }
        "range-sweep" => {
            let mut c = ExperimentConfig::new(name, recipe(10, power_law(1.13), 4.0, 8.0));
            c.observables = dynamics;
            c.sweep = Some(SweepSpec {
                axis: SweepAxis::Alpha,
                values: vec![0.95, 1.13, 1.5, 1.81],
            });
            c
        }
        "qfi-growth" => {
            let mut c = ExperimentConfig::new(name, recipe(10, power_law(1.13), 4.0, 0.0));
            c.observables = vec![Hamming, Qfi];
            c.sweep = Some(SweepSpec {
                axis: SweepAxis::W,
                values: vec![0.0, 6.0, 8.0],
            });
            c
        }
        "alpha3-ed" => {
            let mut c = ExperimentConfig::new(name, recipe(8, kac(3.0), 0.0, 3.0));
            c.observables = vec![Hamming, Qfi];
            c.time = long_grid();
            c.realizations = 500;
            c.analysis.slope_window = [8.0, 27.0];
            c.analysis.steady_window = [27.0, 100.0];
            c.sweep = Some(SweepSpec {
                axis: SweepAxis::N,
                values: vec![4.0, 6.0, 8.0, 10.0],
            });
            c
        }
        "alpha3-free-fermion-n14" | "alpha3-free-fermion-n100" => {
            let n100 = name.ends_with("n100");
            let n = if n100 { 100 } else { 14 };
            let mut c = ExperimentConfig::new(name, recipe(n, kac(3.0), 0.0, 3.0));
            c.engine = Engine::FreeFermion;
            c.observables = vec![Hamming, Qfi];
            c.time = long_grid();
            c.realizations = if n100 { 100 } else { 1000 };
            c.analysis.slope_window = [10.0, 100.0];
            c.analysis.steady_window = [10.0, 100.0];
            c
        }
        "kac-n12-reduced" => {
            let mut c = ExperimentConfig::new(name, recipe(12, kac(1.13), 0.0, 3.0));
            c.observables = vec![Hamming, Qfi];
            c.realizations = 200;
            c
        }
        "field-sweep-level-stats" => {
            let mut c = ExperimentConfig::new(name, recipe(10, power_law(1.13), 1.0, 1.0));
            c.level_stats = Some(LevelStatsConfig {
                resolve_parity: true,
                ..LevelStatsConfig::default()
            });
            c.sweep = Some(SweepSpec {
                axis: SweepAxis::B,
                values: vec![0.25, 0.5, 1.0, 2.0, 4.0, 8.0],
            });
            c
        }
        _ => return None,
    };
    c.name = name.to_string();
    Some(c)
}
