use thiserror::Error;

use crate::field::Representation;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("representation mismatch: expected {expected:?}, found {found:?}")]
    RepresentationMismatch {
        expected: Representation,
        found: Representation,
    },

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("derivative order {0} not supported (max 8)")]
    DerivativeOrder(u32),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// The kernel or nonlinearity does not satisfy the model's standing assumptions.
    #[error("assumption violated: {0}")]
    AssumptionViolated(String),

    #[error("Lipschitz declaration falsified: |F({u1}, {x}) - F({u2}, {x})| / |{u1} - {u2}| = {ratio} > declared l = {declared}")]
    LipschitzFalsified {
        u1: f64,
        u2: f64,
        x: f64,
        ratio: f64,
        declared: f64,
    },

    #[error("non-finite nonlinearity value {value} at x = {x}")]
    NonFinite { x: f64, value: f64 },

    #[error("no admissible window: q*l*sqrt(2) = {product} >= 1")]
    NoAdmissibleWindow { product: f64 },

    #[error("certificate invalid (C = {constant}) and no override given")]
    CertificateRefused { constant: f64 },

    #[error("Picard iteration did not converge in {iterations} iterations (last d_n = {last_distance:e})")]
    NotConverged {
        iterations: usize,
        last_distance: f64,
        distances: Vec<f64>,
    },

    #[error("measured Picard ratio r_{index} = {ratio} exceeds C * {slack} = {bound}")]
    RatioViolation {
        index: usize,
        ratio: f64,
        bound: f64,
        slack: f64,
    },

    #[error("reference integrator unstable at t = {time}: norm {norm:e} exceeds {limit:e}")]
    Unstable { time: f64, norm: f64, limit: f64 },

    #[error("missing forcing history for time derivative")]
    MissingHistory,

    #[error("window {index}: {source}")]
    Window {
        index: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("dump format: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
