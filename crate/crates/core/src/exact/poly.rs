//! Sparse multivariate polynomials with exact rational coefficients.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use super::rational::{self, format_rational, Rational};
use super::ExactError;

/// Default upper bound on the power accepted by [`multinomial_expand`].
pub const DEFAULT_EXPANSION_CAP: u32 = 64;

/// Exponent vector `α` of a monomial `x^α`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct MultiIndex(Vec<u32>);

impl MultiIndex {
    pub fn new(entries: Vec<u32>) -> Self {
        MultiIndex(entries)
    }

    pub fn zero(dim: usize) -> Self {
        MultiIndex(vec![0; dim])
    }

    /// `e_i` in dimension `dim`.
    pub fn unit(dim: usize, i: usize) -> Self {
        let mut v = vec![0; dim];
        v[i] = 1;
        MultiIndex(v)
    }

    pub fn entries(&self) -> &[u32] {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    /// `‖α‖₁`.
    pub fn degree(&self) -> u32 {
        self.0.iter().sum()
    }

    pub fn sum(&self, other: &MultiIndex) -> MultiIndex {
        MultiIndex(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }

    /// All multi-indices of dimension `dim` with total degree `<= max_degree`,
    /// in lexicographic order.
    pub fn all_up_to(dim: usize, max_degree: u32) -> Vec<MultiIndex> {
        fn rec(dim: usize, budget: u32, prefix: &mut Vec<u32>, out: &mut Vec<MultiIndex>) {
            if prefix.len() == dim {
                out.push(MultiIndex(prefix.clone()));
                return;
            }
            for e in 0..=budget {
                prefix.push(e);
                rec(dim, budget - e, prefix, out);
                prefix.pop();
            }
        }
        let mut out = Vec::new();
        rec(dim, max_degree, &mut Vec::with_capacity(dim), &mut out);
        out
    }

    /// All multi-indices of dimension `dim` with total degree exactly `degree`.
    pub fn all_of_degree(dim: usize, degree: u32) -> Vec<MultiIndex> {
        Self::all_up_to(dim, degree)
            .into_iter()
            .filter(|a| a.degree() == degree)
            .collect()
    }
}

impl From<Vec<u32>> for MultiIndex {
    fn from(v: Vec<u32>) -> Self {
        MultiIndex(v)
    }
}

impl fmt::Display for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, e) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{e}")?;
        }
        write!(f, ")")
    }
}

/// `P(x) = Σ a_α x^α` in a fixed number of variables.
///
/// Zero coefficients are never stored, so the zero polynomial has no terms.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Polynomial {
    dim: usize,
    terms: BTreeMap<MultiIndex, Rational>,
}

impl Polynomial {
    pub fn zero(dim: usize) -> Self {
        assert!(dim >= 1, "polynomial dimension must be positive");
        Polynomial { dim, terms: BTreeMap::new() }
    }

    pub fn constant(dim: usize, c: Rational) -> Self {
        Self::monomial(MultiIndex::zero(dim), c)
    }

    pub fn monomial(alpha: MultiIndex, c: Rational) -> Self {
        let mut p = Self::zero(alpha.dim());
        p.add_term(alpha, c);
        p
    }

    /// The coordinate function `x_i` (zero-based).
    pub fn variable(dim: usize, i: usize) -> Self {
        Self::monomial(MultiIndex::unit(dim, i), Rational::one())
    }

    /// Builds a polynomial from `(α, a_α)` pairs, summing repeated indices.
    pub fn from_terms<I>(dim: usize, terms: I) -> Result<Self, ExactError>
    where
        I: IntoIterator<Item = (MultiIndex, Rational)>,
    {
        let mut p = Self::zero(dim);
        for (alpha, c) in terms {
            if alpha.dim() != dim {
                return Err(ExactError::DimensionMismatch { expected: dim, found: alpha.dim() });
            }
            p.add_term(alpha, c);
        }
        Ok(p)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Total degree; the zero polynomial reports 0 (check [`Self::is_zero`]).
    pub fn degree(&self) -> u32 {
        self.terms.keys().map(MultiIndex::degree).max().unwrap_or(0)
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&MultiIndex, &Rational)> {
        self.terms.iter()
    }

    pub fn coefficient(&self, alpha: &MultiIndex) -> Rational {
        self.terms.get(alpha).cloned().unwrap_or_else(Rational::zero)
    }

    pub fn add_term(&mut self, alpha: MultiIndex, c: Rational) {
        debug_assert_eq!(alpha.dim(), self.dim);
        if c.is_zero() {
            return;
        }
        match self.terms.entry(alpha) {
            std::collections::btree_map::Entry::Vacant(v) => {
                v.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut o) => {
                *o.get_mut() += c;
                if o.get().is_zero() {
                    o.remove();
                }
            }
        }
    }

    pub fn add_scaled(&mut self, other: &Polynomial, scale: &Rational) {
        assert_eq!(self.dim, other.dim, "dimension mismatch");
        if scale.is_zero() {
            return;
        }
        for (alpha, c) in &other.terms {
            self.add_term(alpha.clone(), c * scale);
        }
    }

    pub fn scale(&self, s: &Rational) -> Polynomial {
        let mut out = Polynomial::zero(self.dim);
        out.add_scaled(self, s);
        out
    }

    pub fn pow(&self, n: u32) -> Polynomial {
        let mut acc = Polynomial::constant(self.dim, Rational::one());
        for _ in 0..n {
            acc = &acc * self;
        }
        acc
    }

    /// `Σ |a_α|`.
    pub fn l1_norm(&self) -> Rational {
        self.terms.values().map(|c| c.abs()).sum()
    }

    pub fn eval(&self, x: &[Rational]) -> Result<Rational, ExactError> {
        if x.len() != self.dim {
            return Err(ExactError::DimensionMismatch { expected: self.dim, found: x.len() });
        }
        let max_deg = self.degree() as usize;
        let powers: Vec<Vec<Rational>> = x
            .iter()
            .map(|xi| {
                let mut p = Vec::with_capacity(max_deg + 1);
                p.push(Rational::one());
                for e in 1..=max_deg {
                    let next = &p[e - 1] * xi;
                    p.push(next);
                }
                p
            })
            .collect();
        let mut total = Rational::zero();
        for (alpha, c) in &self.terms {
            let mut term = c.clone();
            for (i, &e) in alpha.entries().iter().enumerate() {
                if e > 0 {
                    term *= &powers[i][e as usize];
                }
            }
            total += term;
        }
        Ok(total)
    }

    /// Float evaluation from monomial coefficients. Ill-conditioned for
    /// high-degree polynomials with large coefficients.
    pub fn eval_f64(&self, x: &[f64]) -> f64 {
        assert_eq!(x.len(), self.dim, "dimension mismatch");
        self.terms
            .iter()
            .map(|(alpha, c)| {
                alpha
                    .entries()
                    .iter()
                    .zip(x)
                    .fold(rational::to_f64(c), |acc, (&e, &xi)| acc * xi.powi(e as i32))
            })
            .sum()
    }
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct PolynomialJson {
    d: usize,
    terms: Vec<TermJson>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct TermJson {
    alpha: Vec<u32>,
    a: String,
}

impl Polynomial {
    /// `{"d": …, "terms": [{"alpha": […], "a": "p/q"}, …]}`, terms in index order.
    pub fn to_json(&self) -> String {
        let doc = PolynomialJson {
            d: self.dim,
            terms: self
                .terms
                .iter()
                .map(|(alpha, a)| TermJson { alpha: alpha.entries().to_vec(), a: format_rational(a) })
                .collect(),
        };
        serde_json::to_string(&doc).expect("polynomial documents always serialize")
    }

    pub fn from_json(text: &str) -> Result<Polynomial, ExactError> {
        let de = &mut serde_json::Deserializer::from_str(text);
        let doc: PolynomialJson = serde_path_to_error::deserialize(de).map_err(|e| ExactError::Document {
            path: e.path().to_string(),
            message: e.inner().to_string(),
        })?;
        if doc.d == 0 {
            return Err(ExactError::Document { path: "d".into(), message: "dimension must be at least 1".into() });
        }
        let mut p = Polynomial::zero(doc.d);
        for (i, t) in doc.terms.into_iter().enumerate() {
            if t.alpha.len() != doc.d {
                return Err(ExactError::Document {
                    path: format!("terms[{i}].alpha"),
                    message: format!("length {} does not match d = {}", t.alpha.len(), doc.d),
                });
            }
            let a = rational::parse_rational(&t.a).map_err(|e| ExactError::Document {
                path: format!("terms[{i}].a"),
                message: e.to_string(),
            })?;
            p.add_term(MultiIndex::new(t.alpha), a);
        }
        Ok(p)
    }
}

impl fmt::Display for Polynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (i, (alpha, c)) in self.terms.iter().enumerate() {
            if i > 0 {
                write!(f, " + ")?;
            }
            write!(f, "({})", format_rational(c))?;
            for (v, &e) in alpha.entries().iter().enumerate() {
                match e {
                    0 => {}
                    1 => write!(f, "*x{}", v + 1)?,
                    _ => write!(f, "*x{}^{}", v + 1, e)?,
                }
            }
        }
        Ok(())
    }
}

impl Add for &Polynomial {
    type Output = Polynomial;
    fn add(self, rhs: &Polynomial) -> Polynomial {
        let mut out = self.clone();
        out.add_scaled(rhs, &Rational::one());
        out
    }
}

impl Sub for &Polynomial {
    type Output = Polynomial;
    fn sub(self, rhs: &Polynomial) -> Polynomial {
        let mut out = self.clone();
        out.add_scaled(rhs, &-Rational::one());
        out
    }
}

impl Neg for &Polynomial {
    type Output = Polynomial;
    fn neg(self) -> Polynomial {
        self.scale(&-Rational::one())
    }
}

impl Mul for &Polynomial {
    type Output = Polynomial;
    fn mul(self, rhs: &Polynomial) -> Polynomial {
        assert_eq!(self.dim, rhs.dim, "dimension mismatch");
        let mut out = Polynomial::zero(self.dim);
        for (a, ca) in &self.terms {
            for (b, cb) in &rhs.terms {
                out.add_term(a.sum(b), ca * cb);
            }
        }
        out
    }
}

/// Exact expansion of `(s₁x₁ + … + s_d x_d + c)^power` for integer slopes.
pub fn multinomial_expand(slopes: &[i64], constant: i64, power: u32) -> Result<Polynomial, ExactError> {
    let coeffs: Vec<Rational> = slopes.iter().map(|&s| rational::int(s)).collect();
    expand_affine_power(&coeffs, &rational::int(constant), power, DEFAULT_EXPANSION_CAP)
}

/// Exact expansion of `(w·x + c)^power` for rational `w`, `c`.
///
/// Each term is `power! / (e₁!…e_{d+1}!) · Π wᵢ^{eᵢ} · c^{e_{d+1}}`.
pub fn expand_affine_power(
    linear: &[Rational],
    constant: &Rational,
    power: u32,
    cap: u32,
) -> Result<Polynomial, ExactError> {
    if power > cap {
        return Err(ExactError::ExpansionTooLarge { power, cap });
    }
    let dim = linear.len();
    if dim == 0 {
        return Err(ExactError::DimensionMismatch { expected: 1, found: 0 });
    }
    let n = power as usize;
    let mut factorial = vec![BigInt::one(); n + 1];
    for i in 1..=n {
        factorial[i] = &factorial[i - 1] * BigInt::from(i);
    }
    let powers = |base: &Rational| -> Vec<Rational> {
        let mut v = Vec::with_capacity(n + 1);
        v.push(Rational::one());
        for e in 1..=n {
            let next = &v[e - 1] * base;
            v.push(next);
        }
        v
    };
    let linear_powers: Vec<Option<Vec<Rational>>> = linear
        .iter()
        .map(|w| if w.is_zero() { None } else { Some(powers(w)) })
        .collect();
    let constant_powers = if constant.is_zero() { None } else { Some(powers(constant)) };

    let mut out = Polynomial::zero(dim);
    let mut exps = vec![0u32; dim];

    // Walk compositions of `power` over the variables; the constant takes the remainder.
    #[allow(clippy::too_many_arguments)]
    fn walk(
        var: usize,
        remaining: usize,
        acc: Rational,
        denom: BigInt,
        exps: &mut Vec<u32>,
        linear_powers: &[Option<Vec<Rational>>],
        constant_powers: &Option<Vec<Rational>>,
        factorial: &[BigInt],
        out: &mut Polynomial,
    ) {
        if var == linear_powers.len() {
            let tail = match constant_powers {
                Some(p) => p[remaining].clone(),
                None if remaining == 0 => Rational::one(),
                None => return,
            };
            let multinomial = Rational::new(
                factorial[factorial.len() - 1].clone(),
                denom * &factorial[remaining],
            );
            let coeff = acc * tail * multinomial;
            out.add_term(MultiIndex::new(exps.clone()), coeff);
            return;
        }
        let max_e = if linear_powers[var].is_some() { remaining } else { 0 };
        for e in 0..=max_e {
            let factor = match &linear_powers[var] {
                Some(p) => &acc * &p[e],
                None => acc.clone(),
            };
            exps[var] = e as u32;
            walk(
                var + 1,
                remaining - e,
                factor,
                &denom * &factorial[e],
                exps,
                linear_powers,
                constant_powers,
                factorial,
                out,
            );
        }
        exps[var] = 0;
    }

    walk(
        0,
        n,
        Rational::one(),
        BigInt::one(),
        &mut exps,
        &linear_powers,
        &constant_powers,
        &factorial,
        &mut out,
    );
    Ok(out)
}
