//! Monomials as combinations of k-th powers of integer-slope linear forms.
//!
//! `x^α = Σ c_{n₂…n_d} (x₁ + n₂x₂ + … + n_dx_d)^n`, built by induction on the
//! number of variables: peel off `x_d^{α_d}` with a row of `B_n^{-1}` and
//! recurse on the remaining variables at degree `n − α_d`.

use std::collections::BTreeMap;

use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::exact::rational::{self, int, Rational};
use crate::exact::{multinomial_expand, ExactError, MultiIndex, Polynomial};
use crate::vandermonde;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DecompError {
    #[error("the monomial x^{0} is constant; only d = 1 has a homogeneous degree-0 table")]
    ConstantMonomial(MultiIndex),
    #[error("degree {degree} exceeds the budget k = {k}")]
    DegreeExceedsBudget { degree: u32, k: u32 },
    #[error("degree budget k must be at least 1")]
    ZeroBudget,
    #[error("multi-index must have at least one entry")]
    EmptyIndex,
    #[error(transparent)]
    Exact(#[from] ExactError),
}

/// A linear form `x₁ + n₂x₂ + … + n_dx_d (+ n_{d+1})`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LinearForm {
    pub slopes: Vec<i64>,
    pub constant: i64,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DecompositionTable {
    pub alpha: MultiIndex,
    pub degree: u32,
    /// In the inhomogeneous variant the last key entry is the constant slot.
    pub homogeneous: bool,
    /// Nonzero coefficients only.
    pub entries: BTreeMap<Vec<i64>, Rational>,
}

impl DecompositionTable {
    pub fn form(&self, key: &[i64]) -> LinearForm {
        let mut slopes = Vec::with_capacity(self.alpha.dim());
        slopes.push(1);
        if self.homogeneous {
            slopes.extend_from_slice(key);
            LinearForm { slopes, constant: 0 }
        } else {
            let (last, rest) = key.split_last().expect("inhomogeneous keys carry a constant slot");
            slopes.extend_from_slice(rest);
            LinearForm { slopes, constant: *last }
        }
    }

    /// Length of the slope tuples (`d − 1`, or `d` with the constant slot).
    pub fn key_len(&self) -> usize {
        if self.homogeneous {
            self.alpha.dim() - 1
        } else {
            self.alpha.dim()
        }
    }

    /// All tuples of the integer grid `{−⌊n/2⌋, …, n−⌊n/2⌋}^{key_len}`, lexicographic.
    pub fn grid(&self) -> Vec<Vec<i64>> {
        grid(self.degree, self.key_len())
    }

    pub fn coefficient(&self, key: &[i64]) -> Rational {
        self.entries.get(key).cloned().unwrap_or_else(Rational::zero)
    }

    pub fn max_abs(&self) -> Rational {
        self.entries.values().map(|c| c.abs()).max().unwrap_or_else(Rational::zero)
    }

    /// `(n/2 + 1)^{2d}`, or `(k/2 + 1)^{2(d+1)}` for the inhomogeneous variant.
    pub fn coefficient_bound(&self) -> Rational {
        let base = Rational::new(self.degree.into(), 2.into()) + int(1);
        let vars = if self.homogeneous { self.alpha.dim() } else { self.alpha.dim() + 1 };
        rational::pow(&base, 2 * vars as u64)
    }

    pub fn to_json(&self) -> DecompositionJson {
        DecompositionJson {
            alpha: self.alpha.entries().to_vec(),
            n: self.degree,
            homogeneous: self.homogeneous,
            entries: self
                .grid()
                .into_iter()
                .map(|slopes| {
                    let c = self.coefficient(&slopes);
                    DecompositionEntry { slopes, c }
                })
                .collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DecompositionJson {
    pub alpha: Vec<u32>,
    pub n: u32,
    pub homogeneous: bool,
    pub entries: Vec<DecompositionEntry>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DecompositionEntry {
    pub slopes: Vec<i64>,
    #[serde(with = "rational::serde_str")]
    pub c: Rational,
}

pub fn grid(n: u32, len: usize) -> Vec<Vec<i64>> {
    let nodes = vandermonde::nodes(n);
    let mut out = vec![Vec::with_capacity(len)];
    for _ in 0..len {
        out = out
            .into_iter()
            .flat_map(|prefix| {
                nodes.iter().map(move |&v| {
                    let mut t = prefix.clone();
                    t.push(v);
                    t
                })
            })
            .collect();
    }
    out
}

pub fn decompose_monomial(alpha: &MultiIndex) -> Result<DecompositionTable, DecompError> {
    if alpha.dim() == 0 {
        return Err(DecompError::EmptyIndex);
    }
    let n = alpha.degree();
    if n == 0 && alpha.dim() > 1 {
        return Err(DecompError::ConstantMonomial(alpha.clone()));
    }
    Ok(DecompositionTable {
        alpha: alpha.clone(),
        degree: n,
        homogeneous: true,
        entries: recurse(alpha.entries(), n),
    })
}

/// `x^α = Σ c (x₁ + n₂x₂ + … + n_dx_d + n_{d+1})^k`, via the padded index
/// `(α, k − |α|)` with the extra variable set to one.
pub fn decompose_inhomogeneous(alpha: &MultiIndex, k: u32) -> Result<DecompositionTable, DecompError> {
    if alpha.dim() == 0 {
        return Err(DecompError::EmptyIndex);
    }
    if k == 0 {
        return Err(DecompError::ZeroBudget);
    }
    let degree = alpha.degree();
    if degree > k {
        return Err(DecompError::DegreeExceedsBudget { degree, k });
    }
    let mut padded = alpha.entries().to_vec();
    padded.push(k - degree);
    Ok(DecompositionTable {
        alpha: alpha.clone(),
        degree: k,
        homogeneous: false,
        entries: recurse(&padded, k),
    })
}

// Keys have length alpha.len() − 1. Degree 0 is allowed internally: the
// inner recursion reaches it whenever the trailing exponents use up n.
fn recurse(alpha: &[u32], n: u32) -> BTreeMap<Vec<i64>, Rational> {
    let Some((&last, prefix)) = alpha.split_last().filter(|(_, p)| !p.is_empty()) else {
        return BTreeMap::from([(Vec::new(), Rational::one())]);
    };
    let j = n - last;
    let inner = recurse(prefix, j);
    let bhat = vandermonde::bhat(n, j);
    let nodes = vandermonde::nodes(n);
    let mut out = BTreeMap::new();
    for (key, c) in &inner {
        for (b, &node) in bhat.iter().zip(&nodes) {
            if b.is_zero() {
                continue;
            }
            let mut k = key.clone();
            k.push(node);
            out.insert(k, c * b);
        }
    }
    out
}

/// `Σ c·(form)^n − x^α`; identically zero for a correct table.
pub fn verify_table(t: &DecompositionTable) -> Result<Polynomial, DecompError> {
    let d = t.alpha.dim();
    let mut acc = Polynomial::zero(d);
    for (key, c) in &t.entries {
        let form = t.form(key);
        acc.add_scaled(&multinomial_expand(&form.slopes, form.constant, t.degree)?, c);
    }
    acc.add_term(t.alpha.clone(), -int(1));
    Ok(acc)
}
