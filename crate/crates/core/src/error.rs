use thiserror::Error;

/// Errors produced by the guidance, simulation and stability routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("non-finite input: {0}")]
    NonFiniteInput(&'static str),

    #[error("degenerate geometry: {0}")]
    DegenerateGeometry(String),

    /// Chord of length `d_star` does not fit inside a circle of radius `radius`.
    #[error("domain error: d_star = {d_star} must be < 2R = {} (chord must exist)", .radius * 2.0)]
    ChordTooLong { d_star: f64, radius: f64 },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid scenario field `{field}`: {reason}")]
    InvalidScenario { field: String, reason: String },

    #[error("state became non-finite at t = {t} s (vehicle {vehicle})")]
    NonFiniteState { t: f64, vehicle: usize },

    #[error("right-hand side non-finite while probing coordinate {coordinate}")]
    NonFiniteJacobian { coordinate: usize },

    #[error("eigenvalue iteration did not converge after {iterations} iterations (n = {dim}, |A|_F = {norm:e})")]
    EigenNoConvergence { iterations: usize, dim: usize, norm: f64 },

    #[error("beta extraction failed: {0}")]
    BetaExtraction(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
