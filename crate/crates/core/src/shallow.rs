//! Polynomials of degree ≤ k as shallow ReLU^k networks of width `2(k+1)^d`.
//!
//! Every monomial is decomposed into k-th powers of the forms
//! `x₁ + n₂x₂ + … + n_dx_d + n_{d+1}`. Summing over monomials gives one
//! coefficient β per grid point, and each power `ℓ^k` becomes the unit pair
//! `σ_k(ℓ) + (−1)^k σ_k(−ℓ)`. Directions are rescaled by `B/⌈k/2⌉` so that
//! every hidden parameter lies in `[−B, B]`.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_traits::{Signed, Zero};
use thiserror::Error;

use crate::decomp::{self, decompose_inhomogeneous, DecompError};
use crate::exact::rational::{self, int, Rational};
use crate::exact::{Polynomial, SparseMatrix, SparseVector};
use crate::network::{DeclaredBounds, ShallowNetwork};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CompileError {
    #[error("the activation exponent must satisfy k ≥ 2 (got {0})")]
    ExponentTooSmall(u32),
    #[error("degree {degree} exceeds k = {k}")]
    DegreeExceedsK { degree: u32, k: u32 },
    #[error("the weight bound B must be positive")]
    NonPositiveBound,
    #[error("depth L must be at least 1")]
    ZeroDepth,
    #[error("k^L overflows for k = {k}, L = {depth}")]
    ExponentOverflow { k: u32, depth: u32 },
    #[error(transparent)]
    Decomp(#[from] DecompError),
}

pub fn width(k: u32, d: usize) -> usize {
    2 * (k as usize + 1).pow(d as u32)
}

/// `β` for every grid tuple `(n₂, …, n_d, n_{d+1})`, zeros included,
/// in lexicographic order.
pub fn aggregate_coefficients(p: &Polynomial, k: u32) -> Result<Vec<(Vec<i64>, Rational)>, CompileError> {
    let mut beta: BTreeMap<Vec<i64>, Rational> = BTreeMap::new();
    for (alpha, a) in p.terms() {
        let table = decompose_inhomogeneous(alpha, k)?;
        for (key, c) in table.entries {
            *beta.entry(key).or_insert_with(Rational::zero) += a * c;
        }
    }
    Ok(decomp::grid(k, p.dim())
        .into_iter()
        .map(|key| {
            let b = beta.remove(&key).unwrap_or_else(Rational::zero);
            (key, b)
        })
        .collect())
}

fn validate(p: &Polynomial, k: u32, bound: &Rational) -> Result<(), CompileError> {
    if k < 2 {
        return Err(CompileError::ExponentTooSmall(k));
    }
    if !bound.is_positive() {
        return Err(CompileError::NonPositiveBound);
    }
    if p.degree() > k {
        return Err(CompileError::DegreeExceedsK { degree: p.degree(), k });
    }
    Ok(())
}

pub fn compile_shallow(p: &Polynomial, k: u32, bound: &Rational) -> Result<ShallowNetwork, CompileError> {
    validate(p, k, bound)?;
    let d = p.dim();
    let half = int(i64::from(k.div_ceil(2)));
    let scale = bound / &half;
    let out_scale = rational::pow(&(&half / bound), u64::from(k));
    let sign = if k.is_multiple_of(2) { int(1) } else { int(-1) };

    let betas = aggregate_coefficients(p, k)?;
    let n = 2 * betas.len();
    let mut weights = SparseMatrix::zeros(n, d);
    let mut bias = SparseVector::zeros(n);
    let mut output = SparseVector::zeros(n);
    for (g, (key, beta)) in betas.iter().enumerate() {
        let (constant, slopes) = key.split_last().expect("grid keys have length d");
        let c = beta * &out_scale;
        for (unit, orientation) in [(2 * g, int(1)), (2 * g + 1, int(-1))] {
            let s = &scale * &orientation;
            weights.insert(unit, 0, s.clone());
            for (i, &slope) in slopes.iter().enumerate() {
                weights.insert(unit, i + 1, &s * int(slope));
            }
            bias.insert(unit, &s * int(*constant));
        }
        output.insert(2 * g + 1, &c * &sign);
        output.insert(2 * g, c);
    }
    let mut net = ShallowNetwork::new(k, weights, bias, output);
    net.declared_bounds = Some(DeclaredBounds { b: bound.clone(), m: shallow_m_bound(p, k, bound) });
    Ok(net)
}

/// `B^{−k} (k/2+1)^{2(d+1)+k} Σ|a_α|`.
pub fn shallow_m_bound(p: &Polynomial, k: u32, bound: &Rational) -> Rational {
    let base = Rational::new(BigInt::from(k), BigInt::from(2)) + int(1);
    let power = 2 * (p.dim() as u64 + 1) + u64::from(k);
    let prefactor = rational::pow_signed(bound, -i64::from(k)).expect("B is positive");
    prefactor * rational::pow(&base, power) * p.l1_norm()
}
