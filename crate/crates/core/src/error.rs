//! Crate-wide error type.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("unknown model `{0}`")]
    UnknownModel(String),

    #[error("scale must be positive, got {0}")]
    NonPositiveScale(f64),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("sample is empty")]
    EmptySample,

    #[error(
        "bandwidth {h} too small for noise `{noise}`: 1/|f*| exceeds the overflow guard{}",
        min_feasible.map(|m| format!("; minimum feasible h is about {m:.3e}")).unwrap_or_default()
    )]
    BandwidthTooSmall {
        h: f64,
        noise: String,
        min_feasible: Option<f64>,
    },

    #[error("spectrum is not Hermitian-symmetric: max pair deviation {deviation:.3e} exceeds {tolerance:.3e}")]
    SymmetryViolation { deviation: f64, tolerance: f64 },

    #[error("inverse transform left an imaginary residue {residue:.3e} above {tolerance:.3e}; upstream spectrum is inconsistent")]
    ImaginaryResidue { residue: f64, tolerance: f64 },

    #[error("estimate grid [{got_lo}, {got_hi}] does not cover the target support [{need_lo}, {need_hi}]")]
    GridCoverage {
        got_lo: f64,
        got_hi: f64,
        need_lo: f64,
        need_hi: f64,
    },

    #[error("asymptotic bandwidth undefined: bracket {bracket:.3e} is not positive at n = {n}")]
    InfeasibleBandwidth { bracket: f64, n: f64 },

    #[error("log-log fit requires positive inputs of length >= 3")]
    DegenerateFit,
}

pub type Result<T> = std::result::Result<T, Error>;
