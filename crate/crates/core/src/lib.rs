//! Exact compilation of polynomials and shallow networks into ReLU^k networks.

pub mod exact;
pub mod vandermonde;
pub mod decomp;
pub mod network;
pub mod shallow;
pub mod deep;
pub mod embed;
pub mod lab;
pub mod points;
pub mod certify;
pub mod cli;
