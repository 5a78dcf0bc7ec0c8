use alloc::string::String;

/// Errors raised by the model constructors and numerical kernels.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("{what} did not converge after {iterations} iterations (residual {residual:e})")]
    NonConvergence {
        what: &'static str,
        iterations: usize,
        residual: f64,
    },

    #[error("zig-zag instability: transverse mode {mode} has eigenvalue {eigenvalue:e} <= 0")]
    ZigZagInstability { mode: usize, eigenvalue: f64 },

    #[error("beatnote detuning {detuning} is within the resonance margin of mode {mode} (frequency {frequency})")]
    Resonance {
        mode: usize,
        frequency: f64,
        detuning: f64,
    },

    #[error("{n} spins exceed the exact-diagonalization cap of {cap}; use the free-fermion engine for larger chains")]
    Capacity { n: usize, cap: usize },

    #[error("energy {energy} lies outside the open spectral interval ({min}, {max}); no finite inverse temperature")]
    NoFiniteBeta { energy: f64, min: f64, max: f64 },

    #[error("Krylov propagation stalled at t = {time} (step {step:e}, error estimate {estimate:e})")]
    KrylovStep { time: f64, step: f64, estimate: f64 },
}

pub type Result<T> = core::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidArgument(msg.into())
}
