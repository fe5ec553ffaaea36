//! Exact scalars, polynomials and linear algebra.

pub mod matrix;
pub mod poly;
pub mod rational;
pub mod sparse;

use thiserror::Error;

pub use matrix::{solve_linear_exact, ExactMatrix, ExactVector};
pub use poly::{expand_affine_power, multinomial_expand, MultiIndex, Polynomial, DEFAULT_EXPANSION_CAP};
pub use rational::{format_rational, parse_rational, ParseRationalError, Rational};
pub use sparse::{SparseMatrix, SparseVector};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ExactError {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("expansion too large: power {power} exceeds the cap {cap}")]
    ExpansionTooLarge { power: u32, cap: u32 },
    #[error("singular system")]
    Singular,
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("malformed document at {path}: {message}")]
    Document { path: String, message: String },
}
