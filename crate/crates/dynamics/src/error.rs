use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DynamicsError {
    #[error("singular attitude: |theta| = {theta} rad is within {tol} of pi/2")]
    SingularAttitude { theta: f64, tol: f64 },

    #[error("thruster {index} command {value} N exceeds the {limit} N limit")]
    Saturation { index: usize, value: f64, limit: f64 },

    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("thruster index {0} out of range 1..=8")]
    ThrusterIndex(usize),

    #[error("invalid vehicle parameters: {0}")]
    InvalidParams(String),
}
