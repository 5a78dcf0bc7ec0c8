//! Files written for a run: `result.json`, `series.csv`, `level_stats.csv`
//! and the resolved `config.toml`.

use std::fs;
use std::path::{Path, PathBuf};

use crate::ensemble::{EnsembleResult, RealizationOutput};
use crate::error::{LabError, Result};
use crate::fmt_f64;
use crate::sweep::SweepResult;

fn finish(w: csv::Writer<Vec<u8>>) -> Result<String> {
    let bytes = w.into_inner().map_err(|e| LabError::config(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| LabError::config(e.to_string()))
}

/// `t, <component>_mean, <component>_stderr, …, realizations`.
pub fn series_csv(result: &EnsembleResult) -> Result<String> {
    let mut header = vec!["t".to_string()];
    for s in &result.series {
        for c in &s.components {
            header.push(format!("{c}_mean"));
            header.push(format!("{c}_stderr"));
        }
    }
    header.push("realizations".into());
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(&header)?;
    let r = result.realization_count().to_string();
    for (k, &t) in result.times.iter().enumerate() {
        let mut row = vec![fmt_f64(t)];
        for s in &result.series {
            for (m, e) in s.mean[k].iter().zip(&s.stderr[k]) {
                row.push(fmt_f64(*m));
                row.push(fmt_f64(*e));
            }
        }
        row.push(r.clone());
        w.write_record(&row)?;
    }
    finish(w)
}

/// Raw series of one realization: `t, <component>, …`.
pub fn realization_csv(result: &EnsembleResult, out: &RealizationOutput) -> Result<String> {
    let mut header = vec!["t".to_string()];
    for s in &result.series {
        header.extend(s.components.iter().cloned());
    }
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(&header)?;
    for (k, &t) in result.times.iter().enumerate() {
        let mut row = vec![fmt_f64(t)];
        for obs in &out.series {
            row.extend(obs[k].iter().map(|&v| fmt_f64(v)));
        }
        w.write_record(&row)?;
    }
    finish(w)
}

/// Histogram bins with the Poisson reference, plus ⟨r⟩ and skip counts.
pub fn level_stats_csv(result: &EnsembleResult) -> Result<Option<String>> {
    let Some(ls) = &result.level_stats else {
        return Ok(None);
    };
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["s_low", "s_high", "count", "density", "poisson", "mean_r", "realizations", "skipped"])?;
    let h = &ls.histogram;
    for k in 0..h.counts.len() {
        w.write_record([
            fmt_f64(h.edges[k]),
            fmt_f64(h.edges[k + 1]),
            h.counts[k].to_string(),
            fmt_f64(h.density[k]),
            fmt_f64(h.poisson[k]),
            fmt_f64(ls.mean_r),
            ls.realization_count.to_string(),
            ls.skipped.to_string(),
        ])?;
    }
    finish(w).map(Some)
}

pub fn result_json(result: &EnsembleResult) -> Result<String> {
    let mut s = serde_json::to_string_pretty(result)?;
    s.push('\n');
    Ok(s)
}

pub fn parse_result(text: &str) -> Result<EnsembleResult> {
    let r: EnsembleResult = serde_json::from_str(text)?;
    if !r.verify_hash()? {
        return Err(LabError::config("result content hash does not match its contents"));
    }
    Ok(r)
}

pub fn load_result(path: &Path) -> Result<EnsembleResult> {
    parse_result(&fs::read_to_string(path).map_err(|e| LabError::io(path, e))?)
}

fn write(path: PathBuf, contents: &str, written: &mut Vec<PathBuf>) -> Result<()> {
    fs::write(&path, contents).map_err(|e| LabError::io(&path, e))?;
    written.push(path);
    Ok(())
}

fn create_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| LabError::io(dir, e))
}

/// Writes every artifact of `result` into `dir`.
pub fn write_result(dir: &Path, result: &EnsembleResult) -> Result<Vec<PathBuf>> {
    create_dir(dir)?;
    let mut written = Vec::new();
    write(dir.join("config.toml"), &result.config.to_toml()?, &mut written)?;
    write(dir.join("result.json"), &result_json(result)?, &mut written)?;
    if !result.series.is_empty() {
        write(dir.join("series.csv"), &series_csv(result)?, &mut written)?;
    }
    if let Some(text) = level_stats_csv(result)? {
        write(dir.join("level_stats.csv"), &text, &mut written)?;
    }
    Ok(written)
}

/// Writes the sweep config and summary, and each point under `point-<k>/`.
pub fn write_sweep(dir: &Path, sweep: &SweepResult) -> Result<Vec<PathBuf>> {
    create_dir(dir)?;
    let mut written = Vec::new();
    write(dir.join("config.toml"), &sweep.config.to_toml()?, &mut written)?;
    write(dir.join("summary.csv"), &sweep.summary_csv()?, &mut written)?;
    for (k, p) in sweep.points.iter().enumerate() {
        written.extend(write_result(&dir.join(format!("point-{k:02}")), p)?);
    }
    Ok(written)
}
