use thiserror::Error;

/// Errors produced by the solvers and reconstruction routines.
#[derive(Debug, Error)]
pub enum Error {
    #[error("wavelength {lambda_um} um outside valid range [{min_um}, {max_um}] um of set '{set}'")]
    WavelengthOutOfRange {
        lambda_um: f64,
        min_um: f64,
        max_um: f64,
        set: String,
    },

    #[error("wavelength {lambda_um} um too close to the validity boundary for a finite-difference derivative (need {margin_um} um of margin)")]
    DerivativeAtBoundary { lambda_um: f64, margin_um: f64 },

    #[error("no phase match in range: {0}")]
    NoPhaseMatch(String),

    #[error("near-collinear approximation violated: internal angle {angle_deg:.3} deg exceeds 3 deg")]
    NearCollinearViolated { angle_deg: f64 },

    #[error("root bracket [{a}, {b}] does not change sign")]
    NoBracket { a: f64, b: f64 },

    #[error("mode dark at this temperature: no spectral intensity above {threshold:e} in range")]
    ModeDark { threshold: f64 },

    #[error("degenerate ring has no ellipse")]
    NoEllipse,

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("invalid density matrix: {0}")]
    InvalidDensityMatrix(String),

    #[error("maximum-likelihood reconstruction did not converge: gradient norm {grad_norm:e} after {iterations} iterations")]
    MleNotConverged { grad_norm: f64, iterations: usize },

    #[error("fit failed: {0}")]
    FitFailed(String),

    #[error("unknown coefficient set '{name}'; available: {available}")]
    UnknownCoefficientSet { name: String, available: String },

    #[error("malformed input at line {line}: {message}")]
    MalformedInput { line: usize, message: String },

    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
