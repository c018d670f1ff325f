use thiserror::Error;

/// Errors shared across the crate.
#[derive(Debug, Error)]
pub enum Error {
    /// Input outside the admissible band of an operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// A denominator of the coefficient system vanished.
    #[error("vanishing denominator {name} = {value:e}")]
    VanishingDenominator { name: &'static str, value: f64 },

    /// A quadratic that should have real roots does not.
    #[error("infeasible: {0}")]
    Infeasible(String),

    /// Malformed serialized certificate or fixture data.
    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
