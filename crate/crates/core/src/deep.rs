//! Polynomials of degree ≤ k^L as deep ReLU^k networks of depth L.
//!
//! The shallow ReLU^{k^L} representation (unit-scale directions) becomes the
//! first layer scaled by B. Each later layer is `B·I`: since its input
//! `σ_{k^i}(·)` is nonnegative, `σ_k(B·σ_{k^i}(t)) = B^k σ_{k^{i+1}}(t)`. After
//! L layers every unit carries the factor `B^{k + k² + … + k^L}`, which the
//! output weights divide out.

use num_bigint::BigInt;
use num_traits::{Signed, ToPrimitive, Zero};

use crate::exact::rational::{self, int, Rational};
use crate::exact::{Polynomial, SparseMatrix, SparseVector};
use crate::network::{DeclaredBounds, DeepNetwork, Layer};
use crate::shallow::{compile_shallow, width, CompileError};

/// `k^L`, or an error when it does not fit in a `u32`.
pub fn total_exponent(k: u32, depth: u32) -> Result<u32, CompileError> {
    if depth == 0 {
        return Err(CompileError::ZeroDepth);
    }
    k.checked_pow(depth).ok_or(CompileError::ExponentOverflow { k, depth })
}

/// `k + k² + … + k^L = k(k^L − 1)/(k − 1)`.
pub fn scale_exponent(k: u32, depth: u32) -> u64 {
    (1..=depth).map(|i| u64::from(k).pow(i)).sum()
}

/// `log₂ B^{k + … + k^L}`, the bit size of the hidden scale factor.
pub fn scale_bits(bound: &Rational, k: u32, depth: u32) -> f64 {
    let log2 = |n: &BigInt| -> f64 {
        let bits = n.bits();
        let shift = bits.saturating_sub(60);
        (n >> shift).to_f64().unwrap_or(1.0).log2() + shift as f64
    };
    let log_b = log2(bound.numer()) - log2(bound.denom());
    log_b.abs() * scale_exponent(k, depth) as f64
}

pub fn compile_deep(p: &Polynomial, k: u32, depth: u32, bound: &Rational) -> Result<DeepNetwork, CompileError> {
    if k < 2 {
        return Err(CompileError::ExponentTooSmall(k));
    }
    if !bound.is_positive() {
        return Err(CompileError::NonPositiveBound);
    }
    let big_k = total_exponent(k, depth)?;
    let shallow = compile_shallow(p, big_k, &int(1))?;
    let n = shallow.width();

    let mut layers = vec![Layer { weights: shallow.layer.weights.scale(bound), bias: shallow.layer.bias.scale(bound) }];
    for _ in 1..depth {
        let mut diag = SparseMatrix::zeros(n, n);
        for u in 0..n {
            diag.insert(u, u, bound.clone());
        }
        layers.push(Layer { weights: diag, bias: SparseVector::from_dense_full(vec![Rational::zero(); n]) });
    }
    let e = i64::try_from(scale_exponent(k, depth)).expect("scale exponent fits in i64");
    let unscale = rational::pow_signed(bound, -e).expect("B is positive");
    Ok(DeepNetwork {
        k,
        input_dim: p.dim(),
        layers,
        output: shallow.output.scale(&unscale),
        declared_bounds: Some(DeclaredBounds { b: bound.clone(), m: deep_m_bound(p, k, depth, bound) }),
    })
}

/// `B^{−(k + … + k^L)} (k^L/2+1)^{2(d+1)+k^L} Σ|a_α|`.
pub fn deep_m_bound(p: &Polynomial, k: u32, depth: u32, bound: &Rational) -> Rational {
    let big_k = u64::from(k).pow(depth);
    let base = Rational::new(BigInt::from(big_k), BigInt::from(2)) + int(1);
    let power = 2 * (p.dim() as u64 + 1) + big_k;
    let e = scale_exponent(k, depth) as i64;
    let prefactor = rational::pow_signed(bound, -e).expect("B is positive");
    prefactor * rational::pow(&base, power) * p.l1_norm()
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExpectedCounts {
    pub widths: Vec<usize>,
    pub nonzero: usize,
}

/// Widths `2(k^L+1)^d` and `2(2L+d)(k^L+1)^d` nonzero parameters.
pub fn expected_deep_counts(k: u32, depth: u32, d: usize) -> ExpectedCounts {
    let big_k = k.pow(depth);
    let w = width(big_k, d);
    ExpectedCounts {
        widths: vec![w; depth as usize],
        nonzero: (2 * depth as usize + d) * w,
    }
}
