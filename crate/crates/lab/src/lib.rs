//! Ensemble orchestration, parameter sweeps, persistence and the `mbl`
//! command line for the [`mbl_core`] many-body-localization toolkit.

pub mod config;
pub mod emit;
pub mod ensemble;
pub mod error;
pub mod model;
pub mod sweep;

pub use config::{preset, Engine, ExperimentConfig, Observable, SweepAxis, PRESETS};
pub use ensemble::{replay, replay_deviation, run_ensemble, EnsembleResult, RealizationOutput, RunOptions};
pub use error::{LabError, Result};
pub use sweep::{sweep, SweepResult};

/// Seventeen significant digits, enough to round-trip any `f64`.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}
