//! Approximation-rate experiments: fit polynomials or shallow networks to
//! targets, compile or embed them, and check that the deep networks reproduce
//! the fitted functions.

pub mod chebyshev;
pub mod experiments;
pub mod greedy;
pub mod quadrature;
pub mod targets;

use thiserror::Error;

use crate::embed::EmbedError;
use crate::shallow::CompileError;

pub use chebyshev::{chebyshev_fit, ChebyshevFit};
pub use experiments::{
    run_analytic_experiment, run_sobolev_experiment, run_variation_experiment, DegreeConfig, ExperimentReport, VariationConfig,
};
pub use greedy::{greedy_fit, Dictionary, DictionaryElement, GreedyFit};
pub use targets::{RidgeTerm, Target, TargetClass};

#[derive(Debug, Error)]
pub enum LabError {
    #[error("config error: {0}")]
    Config(String),
    #[error("evaluation failed: {0}")]
    Evaluation(String),
    #[error("degenerate fit: {0}")]
    Degenerate(String),
    #[error(transparent)]
    Compile(#[from] CompileError),
    #[error(transparent)]
    Embed(#[from] EmbedError),
}
