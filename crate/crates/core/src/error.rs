use thiserror::Error;

/// Failures raised by geometry evaluation, the variational layer, the
/// integrator and the brute-force oracles.
#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    #[error("point {point:?} lies outside the chart: {reason}")]
    OutOfChart { point: Vec<f64>, reason: String },

    #[error("metric is degenerate (|det g| = {det:e})")]
    DegenerateMetric { det: f64 },

    #[error("worldline is not timelike (gamma = {gamma:e})")]
    NonTimelike { gamma: f64 },

    #[error("natural-gauge drift exceeded {limit:e} at s = {s} (|gamma - 1| = {gamma_drift:e}, |beta| = {beta_drift:e})")]
    GaugeViolated {
        s: f64,
        gamma_drift: f64,
        beta_drift: f64,
        limit: f64,
    },

    #[error("adaptive step fell below {min_step:e} at s = {s}")]
    StepUnderflow { s: f64, min_step: f64 },

    #[error("numerical differentiation did not converge: {0}")]
    DifferentiationFailure(String),

    #[error("quadrature did not converge: {0}")]
    QuadratureFailure(String),

    #[error("dimension mismatch: expected {expected}, got {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("u‴ cannot be solved for: the Lagrangian's principal part is singular ({0})")]
    SingularPrincipal(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
}

pub type Result<T> = std::result::Result<T, Error>;
