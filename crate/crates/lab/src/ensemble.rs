//! Disorder ensembles: independent realizations on a bounded worker pool,
//! merged in realization-index order.

use mbl_core::ed::{build_hamiltonian, evolve_grid, sector_eigenvalues, Axis, EvolutionOptions};
use mbl_core::fermion::{build_bdg, ff_observables, init_covariance, BdgPropagator};
use mbl_core::lattice::{realization_seed, sample_disorder, CouplingMatrix, ModelSpec};
use mbl_core::observables::{
    hamming_from_magnetizations, log_time_slope, qfi_staggered, time_average, InitialPattern, TimeSeries,
};
use mbl_core::spectral::{spacing_histogram, ChiSquare, SpacingEnsemble, SpacingHistogram};
use mbl_core::stats::mean_and_stderr;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::config::{Engine, ExperimentConfig, Observable};
use crate::error::{LabError, Result};

pub const FORMAT_VERSION: u32 = 1;

/// Execution settings that cannot change results.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RunOptions {
    pub workers: usize,
}

impl Default for RunOptions {
    fn default() -> Self {
        Self {
            workers: std::thread::available_parallelism().map_or(1, |n| n.get()),
        }
    }
}

impl RunOptions {
    pub fn with_workers(workers: usize) -> Self {
        Self { workers }
    }
}

/// Raw output of one disorder realization.
#[derive(Debug, Clone, PartialEq)]
pub struct RealizationOutput {
    pub index: usize,
    pub seed: u64,
    pub disorder: Vec<f64>,
    /// `series[o][k]`: components of observable `o` at time `k`.
    pub series: Vec<Vec<Vec<f64>>>,
    /// One spectrum, or one per parity sector.
    pub spectra: Vec<Vec<f64>>,
    /// Per-realization scalars in a fixed order.
    pub scalars: Vec<(String, f64)>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeriesSummary {
    pub label: String,
    pub components: Vec<String>,
    /// `mean[k][c]` at `times[k]`.
    pub mean: Vec<Vec<f64>>,
    pub stderr: Vec<Vec<f64>>,
}

impl SeriesSummary {
    pub fn mean_series(&self, times: &[f64]) -> Result<TimeSeries> {
        Ok(TimeSeries::new(self.label.clone(), times.to_vec(), self.mean.clone())?)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DerivedScalar {
    pub name: String,
    pub value: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stderr: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ci: Option<[f64; 2]>,
    /// 1-based site for per-site quantities.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub site: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LevelStatsSummary {
    pub resolve_parity: bool,
    pub realization_count: usize,
    pub spacing_count: usize,
    pub skipped: usize,
    pub mean_r: f64,
    /// Standard error across per-realization means.
    pub mean_r_stderr: f64,
    pub histogram: SpacingHistogram,
    pub chi_square: ChiSquare,
    /// Disorder is uniform, so extra symmetries may contaminate the statistics.
    pub symmetry_flag: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnsembleResult {
    pub format: u32,
    pub config: ExperimentConfig,
    pub times: Vec<f64>,
    pub seeds: Vec<u64>,
    pub scalar_names: Vec<String>,
    /// `per_realization[r][s]` is scalar `scalar_names[s]` of realization `r`.
    pub per_realization: Vec<Vec<f64>>,
    pub series: Vec<SeriesSummary>,
    pub derived: Vec<DerivedScalar>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub level_stats: Option<LevelStatsSummary>,
    pub content_hash: String,
}

impl EnsembleResult {
    pub fn realization_count(&self) -> usize {
        self.seeds.len()
    }

    pub fn series(&self, obs: Observable) -> Option<&SeriesSummary> {
        self.series.iter().find(|s| s.label == obs.label())
    }

    pub fn derived(&self, name: &str) -> Option<&DerivedScalar> {
        self.derived.iter().find(|d| d.name == name)
    }

    /// SHA-256 of the canonical JSON encoding with an empty hash field.
    pub fn compute_hash(&self) -> Result<String> {
        let mut copy = self.clone();
        copy.content_hash.clear();
        let bytes = serde_json::to_vec(&copy)?;
        Ok(hex::encode(Sha256::digest(&bytes)))
    }

    pub fn verify_hash(&self) -> Result<bool> {
        Ok(self.compute_hash()? == self.content_hash)
    }
}

/// Everything shared by the realizations of one ensemble.
struct Prepared {
    config: ExperimentConfig,
    times: Vec<f64>,
    couplings: CouplingMatrix,
    pattern: InitialPattern,
    options: EvolutionOptions,
}

impl Prepared {
    fn new(config: &ExperimentConfig) -> Result<Self> {
        config.validate()?;
        if config.sweep.is_some() {
            return Err(LabError::config("run_ensemble takes a single point; use sweep"));
        }
        Ok(Self {
            config: config.clone(),
            times: config.time.times()?,
            couplings: config.model.couplings.build(config.model.n)?,
            pattern: config.pattern()?,
            options: config.evolution.options(),
        })
    }

    fn n(&self) -> usize {
        self.config.model.n
    }
}

fn run_realization(p: &Prepared, index: usize) -> Result<RealizationOutput> {
    let cfg = &p.config;
    let n = p.n();
    let seed = realization_seed(cfg.master_seed, index as u64);
    let disorder = sample_disorder(cfg.model.w, seed, n)?;
    let values = disorder.values.clone();
    let spec = ModelSpec::new(p.couplings.clone(), cfg.model.field_b, disorder)?;
    let mut series: Vec<Vec<Vec<f64>>> = vec![Vec::with_capacity(p.times.len()); cfg.observables.len()];
    let mut spectra = Vec::new();

    match cfg.engine {
        Engine::Ed => {
            let h = build_hamiltonian(&spec)?;
            if !cfg.observables.is_empty() {
                let psi0 = p.pattern.state()?;
                evolve_grid(&psi0, &h, &p.times, &p.options, |_, psi| {
                    let mags = psi.z_magnetizations();
                    for (o, obs) in cfg.observables.iter().enumerate() {
                        let v = match obs {
                            Observable::Magnetization => mags.clone(),
                            Observable::Hamming => vec![hamming_from_magnetizations(&mags, &p.pattern)?],
                            Observable::Qfi => vec![qfi_staggered(psi)],
                            Observable::Bloch => {
                                let mut v = Vec::with_capacity(3 * n);
                                for (site, &z) in mags.iter().enumerate() {
                                    v.push(psi.expectation_pauli(site, Axis::X)?);
                                    v.push(psi.expectation_pauli(site, Axis::Y)?);
                                    v.push(z);
                                }
                                v
                            }
                        };
                        series[o].push(v);
                    }
                    Ok(())
                })?;
            }
            if let Some(ls) = &cfg.level_stats {
                let [even, odd] = sector_eigenvalues(&h);
                if ls.resolve_parity {
                    spectra = vec![even, odd];
                } else {
                    let mut all = even;
                    all.extend(odd);
                    all.sort_by(f64::total_cmp);
                    spectra = vec![all];
                }
            }
        }
        Engine::FreeFermion => {
            if !cfg.observables.is_empty() {
                let bdg = build_bdg(&spec, &p.pattern)?;
                let prop = BdgPropagator::new(&bdg);
                let prepared = prop.prepare(&init_covariance(&p.pattern))?;
                for &t in &p.times {
                    let obs = ff_observables(&prop.evaluate(&prepared, t))?;
                    for (o, kind) in cfg.observables.iter().enumerate() {
                        let v = match kind {
                            Observable::Magnetization => obs.z.clone(),
                            Observable::Hamming => vec![hamming_from_magnetizations(&obs.z, &p.pattern)?],
                            Observable::Qfi => vec![obs.f_q],
                            Observable::Bloch => unreachable!("rejected by validate"),
                        };
                        series[o].push(v);
                    }
                }
            }
        }
    }

    let scalars = realization_scalars(p, &series, &spectra)?;
    Ok(RealizationOutput {
        index,
        seed,
        disorder: values,
        series,
        spectra,
        scalars,
    })
}

fn realization_scalars(p: &Prepared, series: &[Vec<Vec<f64>>], spectra: &[Vec<f64>]) -> Result<Vec<(String, f64)>> {
    let cfg = &p.config;
    let [lo, hi] = cfg.analysis.steady_window;
    let mut out = Vec::new();
    for (o, obs) in cfg.observables.iter().enumerate() {
        let ts = TimeSeries::new(obs.label(), p.times.clone(), series[o].clone())?;
        let avg = time_average(&ts, lo, hi)?;
        match obs {
            Observable::Hamming => out.push(("steady_hamming".to_string(), avg.mean[0])),
            Observable::Qfi => out.push(("steady_qfi".to_string(), avg.mean[0])),
            Observable::Magnetization => {
                for (i, (&m, &s)) in avg.mean.iter().zip(p.pattern.signs()).enumerate() {
                    out.push((format!("steady_signed_magnetization_{}", i + 1), s as f64 * m));
                }
            }
            Observable::Bloch => {}
        }
    }
    if !spectra.is_empty() {
        let mut single = SpacingEnsemble::new();
        let refs: Vec<&[f64]> = spectra.iter().map(Vec::as_slice).collect();
        single.add_realization(&refs)?;
        if let Some(&r) = single.realization_means.first() {
            out.push(("mean_r".to_string(), r));
        }
    }
    Ok(out)
}

fn site_of(name: &str) -> Option<usize> {
    let (_, tail) = name.rsplit_once('_')?;
    tail.parse().ok()
}

fn aggregate(p: &Prepared, outputs: &[RealizationOutput]) -> Result<EnsembleResult> {
    let cfg = &p.config;
    let n = p.n();
    let r = outputs.len();
    let scalar_names: Vec<String> = outputs[0].scalars.iter().map(|(k, _)| k.clone()).collect();
    let per_realization: Vec<Vec<f64>> = outputs
        .iter()
        .map(|o| o.scalars.iter().map(|(_, v)| *v).collect())
        .collect();

    let mut series = Vec::with_capacity(cfg.observables.len());
    for (o, obs) in cfg.observables.iter().enumerate() {
        let comps = outputs[0].series[o].first().map_or(0, Vec::len);
        let mut mean = Vec::with_capacity(p.times.len());
        let mut stderr = Vec::with_capacity(p.times.len());
        let mut column = vec![0.0; r];
        for k in 0..p.times.len() {
            let (mut mk, mut ek) = (Vec::with_capacity(comps), Vec::with_capacity(comps));
            for c in 0..comps {
                for (slot, out) in column.iter_mut().zip(outputs) {
                    *slot = out.series[o][k][c];
                }
                let (m, e) = mean_and_stderr(&column);
                mk.push(m);
                ek.push(e);
            }
            mean.push(mk);
            stderr.push(ek);
        }
        series.push(SeriesSummary {
            label: obs.label().to_string(),
            components: obs.component_labels(n),
            mean,
            stderr,
        });
    }

    let mut derived = Vec::new();
    for (s, name) in scalar_names.iter().enumerate() {
        let column: Vec<f64> = per_realization.iter().map(|row| row[s]).collect();
        let (value, stderr) = mean_and_stderr(&column);
        derived.push(DerivedScalar {
            name: name.clone(),
            value,
            stderr: Some(stderr),
            ci: None,
            site: if name.starts_with("steady_signed_magnetization_") {
                site_of(name)
            } else {
                None
            },
        });
    }
    let [slo, shi] = cfg.analysis.slope_window;
    let [wlo, whi] = cfg.analysis.steady_window;
    for summary in &series {
        let ts = summary.mean_series(&p.times)?;
        if summary.label == Observable::Qfi.label() {
            if let Ok(fit) = log_time_slope(&ts, 0, slo, shi) {
                derived.push(DerivedScalar {
                    name: "qfi_log_slope".into(),
                    value: fit.slope,
                    stderr: Some(fit.fit.slope_stderr),
                    ci: Some([fit.ci_low, fit.ci_high]),
                    site: None,
                });
            }
        }
        if summary.label == Observable::Bloch.label() {
            let avg = time_average(&ts, wlo, whi)?;
            for i in 0..n {
                let b = &avg.mean[3 * i..3 * i + 3];
                derived.push(DerivedScalar {
                    name: format!("rdm_trace_distance_{}", i + 1),
                    value: 0.5 * (b[0] * b[0] + b[1] * b[1] + b[2] * b[2]).sqrt(),
                    stderr: None,
                    ci: None,
                    site: Some(i + 1),
                });
            }
        }
    }

    let level_stats = match &cfg.level_stats {
        Some(ls) => {
            let mut ens = SpacingEnsemble::new();
            for out in outputs {
                let refs: Vec<&[f64]> = out.spectra.iter().map(Vec::as_slice).collect();
                ens.add_realization(&refs)?;
            }
            let (_, mean_r_stderr) = mean_and_stderr(&ens.realization_means);
            let histogram = spacing_histogram(&ens.spacings, ls.bins, ls.s_max)?;
            let chi_square = histogram.chi_square_poisson();
            Some(LevelStatsSummary {
                resolve_parity: ls.resolve_parity,
                realization_count: ens.realization_count,
                spacing_count: ens.spacings.len(),
                skipped: ens.skipped,
                mean_r: ens.mean_r(),
                mean_r_stderr,
                histogram,
                chi_square,
                symmetry_flag: cfg.model.w == 0.0,
            })
        }
        None => None,
    };

    let mut result = EnsembleResult {
        format: FORMAT_VERSION,
        config: cfg.clone(),
        times: p.times.clone(),
        seeds: outputs.iter().map(|o| o.seed).collect(),
        scalar_names,
        per_realization,
        series,
        derived,
        level_stats,
        content_hash: String::new(),
    };
    result.content_hash = result.compute_hash()?;
    Ok(result)
}

/// Runs every realization of a single-point configuration.
pub fn run_ensemble(config: &ExperimentConfig, options: &RunOptions) -> Result<EnsembleResult> {
    let prepared = Prepared::new(config)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(options.workers.max(1))
        .build()
        .map_err(|e| LabError::config(format!("worker pool: {e}")))?;
    let outputs: Vec<RealizationOutput> = pool.install(|| {
        (0..config.realizations)
            .into_par_iter()
            .map(|k| run_realization(&prepared, k))
            .collect::<Result<Vec<_>>>()
    })?;
    aggregate(&prepared, &outputs)
}

/// Regenerates realization `index` of `result` from its recorded seed.
pub fn replay(result: &EnsembleResult, index: usize) -> Result<RealizationOutput> {
    if index >= result.realization_count() {
        return Err(LabError::config(format!(
            "realization {index} out of range (R = {})",
            result.realization_count()
        )));
    }
    let prepared = Prepared::new(&result.config)?;
    let out = run_realization(&prepared, index)?;
    if out.seed != result.seeds[index] {
        return Err(LabError::config(format!(
            "seed mismatch for realization {index}: recorded {}, regenerated {}",
            result.seeds[index], out.seed
        )));
    }
    Ok(out)
}

/// Largest deviation between a replayed realization and its stored scalars.
pub fn replay_deviation(result: &EnsembleResult, out: &RealizationOutput) -> Result<f64> {
    let stored = result
        .per_realization
        .get(out.index)
        .ok_or_else(|| LabError::config("realization index out of range"))?;
    if stored.len() != out.scalars.len() {
        return Err(LabError::config("scalar table shape mismatch"));
    }
    let mut worst = 0.0f64;
    for ((name, v), (stored_name, s)) in out.scalars.iter().zip(result.scalar_names.iter().zip(stored)) {
        if name != stored_name {
            return Err(LabError::config(format!("scalar {name} does not match stored {stored_name}")));
        }
        worst = worst.max((v - s).abs());
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::preset;

    fn small(observables: Vec<Observable>) -> ExperimentConfig {
        let mut c = preset("thermal").unwrap();
        c.model.n = 4;
        c.model.w = 2.0;
        c.realizations = 3;
        c.observables = observables;
        c
    }

    #[test]
    fn single_realization_has_zero_error() {
        let mut c = small(vec![Observable::Hamming, Observable::Magnetization]);
        c.realizations = 1;
        let r = run_ensemble(&c, &RunOptions::with_workers(1)).unwrap();
        let out = replay(&r, 0).unwrap();
        let hd = r.series(Observable::Hamming).unwrap();
        for (k, v) in out.series[0].iter().enumerate() {
            assert_eq!(hd.mean[k], *v);
            assert_eq!(hd.stderr[k], vec![0.0]);
        }
        assert_eq!(hd.mean[0], vec![0.0]);
        assert!(r.verify_hash().unwrap());
    }

    #[test]
    fn clean_ensemble_realizations_coincide() {
        let mut c = small(vec![Observable::Qfi]);
        c.model.w = 0.0;
        let r = run_ensemble(&c, &RunOptions::with_workers(2)).unwrap();
        assert!(r.per_realization.windows(2).all(|w| w[0] == w[1]));
        assert!(r.series[0].stderr.iter().all(|e| e[0] == 0.0));
    }

    #[test]
    fn derived_scalars_are_named_per_site() {
        let r = run_ensemble(&small(vec![Observable::Magnetization, Observable::Bloch]), &RunOptions::with_workers(1)).unwrap();
        assert!(r.derived("steady_signed_magnetization_4").unwrap().site == Some(4));
        assert!(r.derived("rdm_trace_distance_1").is_some());
        assert_eq!(r.series(Observable::Bloch).unwrap().components.len(), 12);
    }

    #[test]
    fn level_stats_only_run() {
        let mut c = small(vec![]);
        c.model.n = 6;
        c.level_stats = Some(Default::default());
        let r = run_ensemble(&c, &RunOptions::with_workers(1)).unwrap();
        let ls = r.level_stats.unwrap();
        assert_eq!(ls.realization_count, 3);
        assert_eq!(ls.spacing_count, 3 * 63);
        assert!(r.series.is_empty());
        assert_eq!(r.scalar_names, vec!["mean_r"]);
    }

    #[test]
    fn replay_rejects_bad_index() {
        let r = run_ensemble(&small(vec![Observable::Hamming]), &RunOptions::with_workers(1)).unwrap();
        assert!(replay(&r, 3).is_err());
        let out = replay(&r, 2).unwrap();
        assert_eq!(replay_deviation(&r, &out).unwrap(), 0.0);
    }
}
