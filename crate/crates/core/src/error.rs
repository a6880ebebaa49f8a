use thiserror::Error;

use crate::basis::QuantumNumbers;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid quantum numbers (n={n}, l={l}, m={m}): require n >= 1, 0 <= l < n, |m| <= l")]
    InvalidQuantumNumbers { n: i32, l: i32, m: i32 },

    #[error("state {qn} exceeds the configured principal quantum number cap {cap}")]
    BeyondCap { qn: QuantumNumbers, cap: u32 },

    #[error("n cap {0} outside the supported range 1..=30")]
    InvalidCap(u32),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("quadrature node search did not converge: {0}")]
    Convergence(String),

    #[error("linear-regime guard violated: max |C| = {max_coefficient:.3e} exceeds {threshold}")]
    GuardViolation { max_coefficient: f64, threshold: f64 },

    #[error("invalid field configuration: {0}")]
    InvalidField(String),

    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),

    #[error("serialization error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
