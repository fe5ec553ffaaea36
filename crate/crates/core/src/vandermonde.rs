//! The binomially weighted Vandermonde system `B_n` on the integer nodes
//! `−⌊n/2⌋, …, n−⌊n/2⌋`, and rows of its inverse.
//!
//! `B_n[s][i] = binom(n,i)·node_s^i`, so `Σ_s b_s (x + node_s·y)^n` has
//! coefficient `(bᵀB_n)_i` on `x^{n−i} y^i`. A row `b̂` of `B_n^{-1}` therefore
//! isolates a single monomial.

use std::collections::HashMap;
use std::sync::{Arc, OnceLock, RwLock};

use num_bigint::BigInt;
use num_traits::{One, Zero};
use thiserror::Error;

use crate::exact::rational::{binomial, int, Rational};
use crate::exact::{ExactError, ExactMatrix, ExactVector};

pub const DEFAULT_INVERSE_CAP: u32 = 40;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum VandermondeError {
    #[error("the power n must be at least 1")]
    ZeroPower,
    #[error("index j = {j} out of range 0..={n}")]
    IndexOutOfRange { n: u32, j: u32 },
    #[error("n = {n} exceeds the configured cap {cap}")]
    CapExceeded { n: u32, cap: u32 },
    #[error(transparent)]
    Exact(#[from] ExactError),
}

#[derive(Debug, Clone)]
pub struct VandermondeSystem {
    pub n: u32,
    pub nodes: Vec<i64>,
    pub bn: ExactMatrix,
}

pub fn nodes(n: u32) -> Vec<i64> {
    let half = i64::from(n / 2);
    (0..=i64::from(n)).map(|s| s - half).collect()
}

pub fn build_system(n: u32) -> Result<VandermondeSystem, VandermondeError> {
    if n == 0 {
        return Err(VandermondeError::ZeroPower);
    }
    let nodes = nodes(n);
    let size = n as usize + 1;
    let bn = ExactMatrix::from_fn(size, size, |s, i| {
        Rational::from_integer(binomial(u64::from(n), i as u64) * BigInt::from(nodes[s]).pow(i as u32))
    });
    Ok(VandermondeSystem { n, nodes, bn })
}

/// `b̂ = e_{n−j+1}ᵀ B_n^{-1}`: the coefficients with
/// `Σ_s b̂_s (x + node_s·y)^n = x^j y^{n−j}`.
pub fn solve_bhat(n: u32, j: u32) -> Result<ExactVector, VandermondeError> {
    if n == 0 {
        return Err(VandermondeError::ZeroPower);
    }
    if j > n {
        return Err(VandermondeError::IndexOutOfRange { n, j });
    }
    Ok(bhat(n, j).to_vec())
}

/// Unchecked, shared form of [`solve_bhat`]; also defined for `n = 0`.
pub(crate) fn bhat(n: u32, j: u32) -> Arc<Vec<Rational>> {
    inverse_rows(n)[(n - j) as usize].clone()
}

type InverseRows = Arc<Vec<Arc<Vec<Rational>>>>;

fn cache() -> &'static RwLock<HashMap<u32, InverseRows>> {
    static CACHE: OnceLock<RwLock<HashMap<u32, InverseRows>>> = OnceLock::new();
    CACHE.get_or_init(Default::default)
}

fn inverse_rows(n: u32) -> InverseRows {
    if let Some(rows) = cache().read().expect("bhat cache poisoned").get(&n) {
        return rows.clone();
    }
    let rows = Arc::new(lagrange_inverse(n).into_iter().map(Arc::new).collect::<Vec<_>>());
    // Concurrent fills compute identical values; whichever lands first wins.
    cache().write().expect("bhat cache poisoned").entry(n).or_insert(rows).clone()
}

// B_n = V·D with V[s][i] = node_s^i and D = diag(binom(n,i)), so
// B_n^{-1}[i][s] = [t^i] ℓ_s(t) / binom(n,i) where ℓ_s is the Lagrange basis
// polynomial of node s.
fn lagrange_inverse(n: u32) -> Vec<Vec<Rational>> {
    let nodes = nodes(n);
    let size = nodes.len();
    // Π_r (t − node_r), coefficients by ascending power.
    let mut full = vec![BigInt::one()];
    for &r in &nodes {
        let mut next = vec![BigInt::zero(); full.len() + 1];
        for (p, c) in full.iter().enumerate() {
            next[p + 1] += c;
            next[p] -= c * r;
        }
        full = next;
    }
    let mut inv = vec![vec![Rational::zero(); size]; size];
    for (s, &node) in nodes.iter().enumerate() {
        // Synthetic division by (t − node).
        let mut quotient = vec![BigInt::zero(); size];
        let mut carry = BigInt::zero();
        for p in (1..=size).rev() {
            carry = &full[p] + carry * node;
            quotient[p - 1] = carry.clone();
        }
        let denom: BigInt = nodes.iter().filter(|&&r| r != node).map(|&r| BigInt::from(node - r)).product();
        for (i, q) in quotient.into_iter().enumerate() {
            inv[i][s] = Rational::new(q, &denom * binomial(u64::from(n), i as u64));
        }
    }
    inv
}

/// `(n/2 + 1)^2`.
pub fn gautschi_bound(n: u32) -> Rational {
    let base = Rational::new(BigInt::from(n), BigInt::from(2)) + int(1);
    &base * &base
}

/// `‖B_n^{-1}‖_max`, computed by generic exact elimination.
pub fn inverse_max_norm(n: u32) -> Result<Rational, VandermondeError> {
    inverse_max_norm_with_cap(n, DEFAULT_INVERSE_CAP)
}

pub fn inverse_max_norm_with_cap(n: u32, cap: u32) -> Result<Rational, VandermondeError> {
    if n > cap {
        return Err(VandermondeError::CapExceeded { n, cap });
    }
    Ok(build_system(n)?.bn.inverse()?.max_abs())
}
