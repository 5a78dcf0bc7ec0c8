use serde::{Deserialize, Serialize};

use crate::config::{ExperimentConfig, SweepAxis};
use crate::ensemble::{run_ensemble, EnsembleResult, RunOptions};
use crate::error::{LabError, Result};
use crate::fmt_f64;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub config: ExperimentConfig,
    pub axis: SweepAxis,
    pub values: Vec<f64>,
    pub points: Vec<EnsembleResult>,
}

/// One ensemble per value on the configured sweep axis.
pub fn sweep(config: &ExperimentConfig, options: &RunOptions) -> Result<SweepResult> {
    let spec = config
        .sweep
        .as_ref()
        .ok_or_else(|| LabError::config("config has no [sweep] section"))?;
    let points = config
        .points()?
        .iter()
        .map(|p| run_ensemble(p, options))
        .collect::<Result<Vec<_>>>()?;
    Ok(SweepResult {
        config: config.clone(),
        axis: spec.axis,
        values: spec.values.clone(),
        points,
    })
}

impl SweepResult {
    /// Chain-level derived scalars against the sweep axis.
    pub fn summary_csv(&self) -> Result<String> {
        let mut names: Vec<(String, bool, bool)> = Vec::new();
        for p in &self.points {
            for d in p.derived.iter().filter(|d| d.site.is_none()) {
                if !names.iter().any(|(n, _, _)| *n == d.name) {
                    names.push((d.name.clone(), d.stderr.is_some(), d.ci.is_some()));
                }
            }
        }
        let mut header = vec![self.axis.name().to_string()];
        for (name, has_err, has_ci) in &names {
            header.push(name.clone());
            if *has_err {
                header.push(format!("{name}_stderr"));
            }
            if *has_ci {
                header.push(format!("{name}_ci_low"));
                header.push(format!("{name}_ci_high"));
            }
        }
        header.push("realizations".into());
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&header)?;
        for (value, p) in self.values.iter().zip(&self.points) {
            let mut row = vec![fmt_f64(*value)];
            for (name, has_err, has_ci) in &names {
                let d = p.derived(name);
                row.push(d.map_or(String::new(), |d| fmt_f64(d.value)));
                if *has_err {
                    row.push(d.and_then(|d| d.stderr).map_or(String::new(), fmt_f64));
                }
                if *has_ci {
                    let ci = d.and_then(|d| d.ci);
                    row.push(ci.map_or(String::new(), |c| fmt_f64(c[0])));
                    row.push(ci.map_or(String::new(), |c| fmt_f64(c[1])));
                }
            }
            row.push(p.realization_count().to_string());
            w.write_record(&row)?;
        }
        String::from_utf8(w.into_inner().map_err(|e| LabError::config(e.to_string()))?)
            .map_err(|e| LabError::config(e.to_string()))
    }

    /// Derived scalar `name` with its standard error at every sweep value.
    pub fn scalar(&self, name: &str) -> Vec<Option<(f64, f64)>> {
        self.points
            .iter()
            .map(|p| p.derived(name).map(|d| (d.value, d.stderr.unwrap_or(0.0))))
            .collect()
    }
}
