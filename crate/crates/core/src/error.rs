use thiserror::Error;

use crate::Regime;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid calibration: {field} = {value} ({reason})")]
    InvalidCalibration {
        field: &'static str,
        value: f64,
        reason: &'static str,
    },

    /// The closed-form steady-state rate has a non-positive denominator:
    /// the debt stock is too large for households to hold at any finite rate.
    #[error("nonpositive steady-state rate denominator: {denominator:.6e}")]
    NonpositiveDenominator { denominator: f64 },

    #[error("indeterminate two-state system at mu = {mu} ({regime} regime, margin {margin:.3e})")]
    IndeterminateSystem { mu: f64, regime: Regime, margin: f64 },

    #[error("dimension mismatch: {what} has length {got}, expected {expected}")]
    DimensionMismatch {
        what: &'static str,
        got: usize,
        expected: usize,
    },

    #[error("newton did not converge after {iterations} iterations (max residual {residual:.3e})")]
    NoConvergence { iterations: usize, residual: f64 },

    #[error("zlb regime iteration cycled after {iterations} passes")]
    RegimeCycleDetected { iterations: usize },

    #[error("singular jacobian at row {row}")]
    SingularJacobian { row: usize },

    #[error("no shock in [{lo}, {hi}] reproduces the target (f(lo) = {f_lo:.3e}, f(hi) = {f_hi:.3e})")]
    BracketFailure {
        lo: f64,
        hi: f64,
        f_lo: f64,
        f_hi: f64,
    },

    #[error("parse error at row {row}: {message}")]
    ParseError { row: usize, message: String },

    #[error("panel is empty")]
    EmptyPanel,

    #[error("degenerate design: all debt ratios equal")]
    DegenerateDesign,

    #[error("no interior root for (beta, q); final residuals {residuals:?} at beta = {beta}, q = {q}")]
    NoRoot {
        beta: f64,
        q: f64,
        residuals: [f64; 2],
    },

    #[error("{0}")]
    Io(String),
}

impl Error {
    /// Short variant name, printed by the command-line front end.
    pub fn name(&self) -> &'static str {
        match self {
            Error::InvalidCalibration { .. } => "InvalidCalibration",
            Error::NonpositiveDenominator { .. } => "NonpositiveDenominator",
            Error::IndeterminateSystem { .. } => "IndeterminateSystem",
            Error::DimensionMismatch { .. } => "DimensionMismatch",
            Error::NoConvergence { .. } => "NoConvergence",
            Error::RegimeCycleDetected { .. } => "RegimeCycleDetected",
            Error::SingularJacobian { .. } => "SingularJacobian",
            Error::BracketFailure { .. } => "BracketFailure",
            Error::ParseError { .. } => "ParseError",
            Error::EmptyPanel => "EmptyPanel",
            Error::DegenerateDesign => "DegenerateDesign",
            Error::NoRoot { .. } => "NoRoot",
            Error::Io(_) => "Io",
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
