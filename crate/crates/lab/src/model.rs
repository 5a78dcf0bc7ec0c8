//! Model documents: couplings given inline or as a recipe, disorder by seed.

use std::fmt::Write as _;
use std::path::Path;

use mbl_core::lattice::{
    coupling_from_modes, kac_normalized_couplings, power_law_couplings, sample_disorder, CouplingMatrix, ModelSpec,
    Provenance, TrapSpec, DEFAULT_RESONANCE_MARGIN,
};
use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};
use crate::fmt_f64;

fn one() -> f64 {
    1.0
}

fn default_margin() -> f64 {
    DEFAULT_RESONANCE_MARGIN
}

fn yes() -> bool {
    true
}

/// How to obtain the coupling matrix for a chain of `n` spins.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum CouplingRecipe {
    PowerLaw {
        #[serde(default = "one")]
        j_max: f64,
        alpha: f64,
    },
    Kac {
        #[serde(default = "one")]
        j: f64,
        alpha: f64,
    },
    /// Ion-chain couplings; frequencies in units of the axial trap frequency.
    /// With `normalize` the matrix is rescaled to `J_max = 1`.
    NormalMode {
        anisotropy: f64,
        rabi_frequency: f64,
        recoil_frequency: f64,
        beatnote_detuning: f64,
        #[serde(default = "default_margin")]
        resonance_margin: f64,
        #[serde(default = "yes")]
        normalize: bool,
    },
    Inline {
        values: Vec<Vec<f64>>,
    },
}

impl CouplingRecipe {
    pub fn build(&self, n: usize) -> Result<CouplingMatrix> {
        Ok(match *self {
            CouplingRecipe::PowerLaw { j_max, alpha } => power_law_couplings(n, j_max, alpha)?,
            CouplingRecipe::Kac { j, alpha } => kac_normalized_couplings(n, j, alpha)?,
            CouplingRecipe::NormalMode {
                anisotropy,
                rabi_frequency,
                recoil_frequency,
                beatnote_detuning,
                resonance_margin,
                normalize,
            } => {
                let mut trap = TrapSpec::new(n, anisotropy, rabi_frequency, recoil_frequency, beatnote_detuning);
                trap.resonance_margin = resonance_margin;
                let c = coupling_from_modes(&trap)?;
                if normalize {
                    c.normalized().0
                } else {
                    c
                }
            }
            CouplingRecipe::Inline { ref values } => {
                if values.len() != n || values.iter().any(|row| row.len() != n) {
                    return Err(LabError::config(format!("inline couplings must be {n}×{n}")));
                }
                CouplingMatrix::from_values(n, values.concat(), Provenance::Explicit)?
            }
        })
    }

    pub fn alpha(&self) -> Option<f64> {
        match *self {
            CouplingRecipe::PowerLaw { alpha, .. } | CouplingRecipe::Kac { alpha, .. } => Some(alpha),
            _ => None,
        }
    }

    pub fn with_alpha(&self, new_alpha: f64) -> Result<Self> {
        let mut out = self.clone();
        match &mut out {
            CouplingRecipe::PowerLaw { alpha, .. } | CouplingRecipe::Kac { alpha, .. } => *alpha = new_alpha,
            _ => return Err(LabError::config("an alpha sweep needs a power-law or kac coupling recipe")),
        }
        Ok(out)
    }

    pub fn inline(c: &CouplingMatrix) -> Self {
        let n = c.n();
        CouplingRecipe::Inline {
            values: c.values().chunks(n).map(|r| r.to_vec()).collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DisorderDoc {
    pub w: f64,
    #[serde(default)]
    pub seed: u64,
}

/// A single Hamiltonian, serializable as TOML or JSON.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelDocument {
    pub n: usize,
    pub field_b: f64,
    pub couplings: CouplingRecipe,
    pub disorder: DisorderDoc,
}

impl ModelDocument {
    pub fn to_spec(&self) -> Result<ModelSpec> {
        let couplings = self.couplings.build(self.n)?;
        let disorder = sample_disorder(self.disorder.w, self.disorder.seed, self.n)?;
        Ok(ModelSpec::new(couplings, self.field_b, disorder)?)
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        Ok(toml::from_str(text)?)
    }

    pub fn to_toml(&self) -> Result<String> {
        Ok(toml::to_string(self)?)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| LabError::io(path, e))?;
        if path.extension().is_some_and(|e| e == "json") {
            Ok(serde_json::from_str(&text)?)
        } else {
            Self::from_toml(&text)
        }
    }
}

/// Coupling matrix as headerless CSV, one row per spin.
pub fn couplings_csv(c: &CouplingMatrix) -> String {
    let n = c.n();
    let mut out = String::new();
    for row in c.values().chunks(n) {
        let cells: Vec<String> = row.iter().map(|&v| fmt_f64(v)).collect();
        let _ = writeln!(out, "{}", cells.join(","));
    }
    out
}

pub fn parse_couplings_csv(text: &str) -> Result<CouplingMatrix> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for record in reader.records() {
        let record = record?;
        let row = record
            .iter()
            .map(|s| s.parse::<f64>().map_err(|e| LabError::config(format!("coupling entry {s:?}: {e}"))))
            .collect::<Result<Vec<_>>>()?;
        rows.push(row);
    }
    let n = rows.len();
    if rows.iter().any(|r| r.len() != n) {
        return Err(LabError::config("coupling CSV must be square"));
    }
    Ok(CouplingMatrix::from_values(n, rows.concat(), Provenance::Explicit)?)
}
