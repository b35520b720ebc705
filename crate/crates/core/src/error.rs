use thiserror::Error;

use crate::regimes::Regime;

/// Errors produced by the analysis, simulation and experiment routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("curvature order violated: {0}")]
    CurvatureOrder(String),

    #[error("mu1 must be nonnegative (got {0})")]
    NegativeMu1(f64),

    #[error("no decrease guarantee: mu1 + mu2 = {0} <= 0 and not both zero")]
    NoDecreaseGuarantee(f64),

    #[error("non-finite or NaN parameter: {0}")]
    NonFinite(&'static str),

    #[error("splitting lies outside all regimes: {0}")]
    OutsideAllRegimes(String),

    #[error("at least one of f1, f2 must be smooth (L1 and L2 are both infinite)")]
    BothNonsmooth,

    #[error("empty grid")]
    EmptyGrid,

    #[error("iteration count must be at least 1")]
    InvalidN,

    #[error("search range [{lo}, {hi}] contains no feasible shift")]
    InfeasibleRange { lo: f64, hi: f64 },

    #[error("conjugate step returned a non-finite point at iteration {0}")]
    OracleFailure(usize),

    #[error("objective increased by {increase:e} at iteration {iteration} despite mu1 + mu2 >= 0")]
    DivergenceDetected { iteration: usize, increase: f64 },

    #[error("invalid function class: {0}")]
    InvalidClass(String),

    #[error("parameters outside the {regime} domain: {reason}")]
    DomainViolation { regime: Regime, reason: String },

    #[error("mu1 = 0 makes the conjugate step set-valued")]
    DegenerateMu1,

    #[error("derivative cannot be inverted at g = {0}")]
    NonInvertibleDerivative(f64),

    #[error("invalid piecewise quadratic: {0}")]
    InvalidPiecewise(String),

    #[error("invalid PGD setting: {0}")]
    InvalidPgdSetting(String),

    #[error("proximal map returned a non-finite point at iteration {0}")]
    ProxFailure(usize),

    #[error("conjugate step requires eta - lambda >= 0 (got {0})")]
    NegativeCurvature(f64),

    #[error("covariance matrix is numerically zero")]
    SingularCase,

    #[error("invalid problem: {0}")]
    InvalidProblem(String),

    #[error("no solution cluster gathers at least {needed} of {total} runs (largest: {largest})")]
    NoConsensusCluster {
        needed: usize,
        total: usize,
        largest: usize,
    },

    #[error("serialization failed: {0}")]
    Serialization(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Serialization(e.to_string())
    }
}
