//! Shallow ReLU^K networks with `K = k^ℓ` inside deep ReLU^k networks of any
//! depth `L ≥ ℓ` and width `2(k+1)n`.
//!
//! Layers `1..ℓ` raise each unit to `y_m = σ_K(w_m·x + u_m)` in its own slot.
//! The remaining depth is spent passing `y_m` through unchanged: with
//! `Σ_t a_t (y + s_t)^k = y` and the pairing `t^k = σ_k(t) + (−1)^k σ_k(−t)`,
//!
//! ```text
//! y = Σ_t a_t σ_k(y + s_t) + (−1)^k a_t σ_k(−y − s_t),
//! ```
//!
//! so an "expand" layer writes the `2(k+1)` values `σ_k(±(y + s_t))` and every
//! following layer recombines them into `y` and expands again in one step.
//! The output weights read `y_m` back out of the last expansion.

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use thiserror::Error;

use crate::exact::rational::{self, int, Rational};
use crate::exact::{SparseMatrix, SparseVector};
use crate::network::{DeclaredBounds, DeepNetwork, Layer, ShallowNetwork};
use crate::vandermonde;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EmbedError {
    #[error("exponent not embeddable at this depth: K = {big_k} is not k^ℓ with 1 ≤ ℓ ≤ L (k = {k}, L = {depth})")]
    NotEmbeddable { big_k: u32, k: u32, depth: u32 },
    #[error("the activation exponent must satisfy k ≥ 2 (got {0})")]
    ExponentTooSmall(u32),
}

/// `Σ_t a_t (y + shift_t)^k = y`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IdentityCombination {
    pub k: u32,
    pub shifts: Vec<i64>,
    pub a: Vec<Rational>,
}

pub fn identity_combination(k: u32) -> IdentityCombination {
    assert!(k >= 1, "identity combination needs k ≥ 1");
    IdentityCombination { k, shifts: vandermonde::nodes(k), a: vandermonde::bhat(k, 1).to_vec() }
}

/// The ℓ with `k^ℓ = big_k`, if any.
pub fn power_level(big_k: u32, k: u32) -> Option<u32> {
    let mut level = 0;
    let mut acc = 1u64;
    while acc < u64::from(big_k) {
        acc *= u64::from(k);
        level += 1;
    }
    (acc == u64::from(big_k)).then_some(level)
}

/// `[(4L−2)(k+1) + d]·n`.
pub fn embed_param_count(k: u32, depth: u32, n: usize, d: usize) -> usize {
    ((4 * depth as usize - 2) * (k as usize + 1) + d) * n
}

/// Number of parameters `embed_shallow` allocates for power level ℓ.
pub fn embed_structural_count(k: u32, depth: u32, level: u32, n: usize, d: usize) -> usize {
    let (depth, level) = (depth as usize, level as usize);
    let e = 2 * (k as usize + 1);
    let raise = d + 1 + (level - 1);
    if level == depth {
        return n * (raise + 1);
    }
    n * (raise + 2 * e + (depth - level - 1) * (e * e + e) + e)
}

/// `(k/2 + 1)^4`.
pub fn pass_through_factor(k: u32) -> Rational {
    let base = Rational::new(BigInt::from(k), BigInt::from(2)) + int(1);
    rational::pow(&base, 4)
}

pub fn embed_shallow(f: &ShallowNetwork, k: u32, depth: u32) -> Result<DeepNetwork, EmbedError> {
    if k < 2 {
        return Err(EmbedError::ExponentTooSmall(k));
    }
    let not_embeddable = EmbedError::NotEmbeddable { big_k: f.k, k, depth };
    let level = power_level(f.k, k).ok_or_else(|| not_embeddable.clone())?;
    if level == 0 || level > depth {
        return Err(not_embeddable);
    }
    let n = f.width();
    let d = f.input_dim();
    let e = 2 * (k as usize + 1);
    let width = e * n;
    let ident = identity_combination(k);
    let sign = if k.is_multiple_of(2) { int(1) } else { int(-1) };

    let mut layers = Vec::with_capacity(depth as usize);
    let mut first = Layer { weights: SparseMatrix::zeros(width, d), bias: SparseVector::zeros(width) };
    for m in 0..n {
        for j in 0..d {
            first.weights.insert(m, j, f.layer.weights.get(m, j));
        }
        first.bias.insert(m, f.layer.bias.get(m));
    }
    layers.push(first);
    for _ in 1..level {
        let mut diag = SparseMatrix::zeros(width, width);
        for m in 0..n {
            diag.insert(m, m, Rational::one());
        }
        layers.push(Layer { weights: diag, bias: SparseVector::zeros(width) });
    }

    let output = if level == depth {
        let mut out = SparseVector::zeros(width);
        for m in 0..n {
            out.insert(m, f.output.get(m));
        }
        out
    } else {
        let mut expand = Layer { weights: SparseMatrix::zeros(width, width), bias: SparseVector::zeros(width) };
        for m in 0..n {
            for (t, s) in ident.shifts.iter().enumerate() {
                let row = e * m + 2 * t;
                expand.weights.insert(row, m, int(1));
                expand.bias.insert(row, int(*s));
                expand.weights.insert(row + 1, m, int(-1));
                expand.bias.insert(row + 1, int(-s));
            }
        }
        layers.push(expand);
        for _ in level + 1..depth {
            let mut block = Layer { weights: SparseMatrix::zeros(width, width), bias: SparseVector::zeros(width) };
            for m in 0..n {
                for (t_out, s) in ident.shifts.iter().enumerate() {
                    let row = e * m + 2 * t_out;
                    for (t_in, a) in ident.a.iter().enumerate() {
                        let col = e * m + 2 * t_in;
                        let paired = a * &sign;
                        block.weights.insert(row, col, a.clone());
                        block.weights.insert(row, col + 1, paired.clone());
                        block.weights.insert(row + 1, col, -a);
                        block.weights.insert(row + 1, col + 1, -paired);
                    }
                    block.bias.insert(row, int(*s));
                    block.bias.insert(row + 1, int(-s));
                }
            }
            layers.push(block);
        }
        let mut out = SparseVector::zeros(width);
        for m in 0..n {
            let c = f.output.get(m);
            for (t, a) in ident.a.iter().enumerate() {
                let base = &c * a;
                out.insert(e * m + 2 * t + 1, &base * &sign);
                out.insert(e * m + 2 * t, base);
            }
        }
        out
    };

    let (b, m) = match &f.declared_bounds {
        Some(db) => (db.b.clone(), db.m.clone()),
        None => {
            let b = f.layer.weights.max_abs().max(f.layer.bias.max_abs());
            (b, f.output.max_abs())
        }
    };
    let factor = pass_through_factor(k);
    Ok(DeepNetwork {
        k,
        input_dim: d,
        layers,
        output,
        declared_bounds: Some(DeclaredBounds { b: b.max(factor.clone()), m: factor * m }),
    })
}

/// Largest `|a_t|` of the identity combination.
pub fn identity_max_abs(k: u32) -> Rational {
    identity_combination(k).a.iter().map(|a| a.abs()).max().unwrap_or_else(Rational::zero)
}
