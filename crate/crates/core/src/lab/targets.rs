//! Target functions for the approximation experiments.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::LabError;
use crate::network::sigma_f64;

/// One term `weight · σ_K(ω·x + b)` of a ridge combination.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RidgeTerm {
    pub weight: f64,
    pub direction: Vec<f64>,
    pub offset: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Target {
    /// `1/(1 + a x²)`.
    Runge { a: f64 },
    /// `exp(x)`.
    Exp,
    /// `|x|^r`.
    AbsPower { r: u32 },
    /// `Σ c_j x^j`.
    Polynomial { coefficients: Vec<f64> },
    /// `Σ weight · σ_K(ω·x + b)`; `exponent` defaults to the experiment's K.
    RidgeCombination {
        #[serde(default)]
        exponent: Option<u32>,
        terms: Vec<RidgeTerm>,
        #[serde(default)]
        norm_bound: Option<f64>,
    },
    /// A convex combination of `terms` random dictionary elements drawn from
    /// the experiment seed.
    RandomRidgeCombination { terms: usize, dim: usize },
}

/// What the experiments know about a target.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "class", rename_all = "snake_case")]
pub enum TargetClass {
    /// Analytic inside the Bernstein ellipse of parameter `1/rho`; `rho` is
    /// `None` for entire functions.
    Analytic { rho: Option<f64> },
    Sobolev { r: u32 },
    Polynomial { degree: u32 },
    Variation { norm: f64 },
}

impl Target {
    pub fn dim(&self) -> usize {
        match self {
            Target::RidgeCombination { terms, .. } => terms.first().map_or(1, |t| t.direction.len()),
            Target::RandomRidgeCombination { dim, .. } => *dim,
            _ => 1,
        }
    }

    pub fn class(&self) -> TargetClass {
        match self {
            Target::Runge { a } => {
                let b = 1.0 / a.sqrt();
                TargetClass::Analytic { rho: Some(1.0 / (b + (1.0 + b * b).sqrt())) }
            }
            Target::Exp => TargetClass::Analytic { rho: None },
            Target::AbsPower { r } => TargetClass::Sobolev { r: *r },
            Target::Polynomial { coefficients } => {
                let degree = coefficients.iter().rposition(|c| *c != 0.0).unwrap_or(0);
                TargetClass::Polynomial { degree: degree as u32 }
            }
            Target::RidgeCombination { terms, norm_bound, .. } => {
                TargetClass::Variation { norm: norm_bound.unwrap_or_else(|| terms.iter().map(|t| t.weight.abs()).sum()) }
            }
            Target::RandomRidgeCombination { .. } => TargetClass::Variation { norm: 1.0 },
        }
    }

    pub fn validate(&self) -> Result<(), LabError> {
        let bad = |m: String| Err(LabError::Config(m));
        match self {
            Target::Runge { a } if !(a.is_finite() && *a > 0.0) => bad(format!("runge: a must be positive, got {a}")),
            Target::AbsPower { r } if *r % 2 == 0 => bad(format!("abs_power: r = {r} is even, so |x|^r is a polynomial")),
            Target::Polynomial { coefficients } if coefficients.is_empty() || coefficients.iter().any(|c| !c.is_finite()) => {
                bad("polynomial: coefficients must be a non-empty list of finite numbers".into())
            }
            Target::RidgeCombination { terms, norm_bound, .. } => {
                let d = self.dim();
                if terms.is_empty() {
                    return bad("ridge_combination: no terms".into());
                }
                for (i, t) in terms.iter().enumerate() {
                    let norm = t.direction.iter().map(|w| w * w).sum::<f64>().sqrt();
                    if t.direction.len() != d || (norm - 1.0).abs() > 1e-12 {
                        return bad(format!("ridge_combination: terms[{i}].direction must be a unit vector in dimension {d}"));
                    }
                    if !(-1.0..=1.0).contains(&t.offset) {
                        return bad(format!("ridge_combination: terms[{i}].offset must lie in [-1, 1]"));
                    }
                }
                let total: f64 = terms.iter().map(|t| t.weight.abs()).sum();
                match norm_bound {
                    Some(r) if total > r * (1.0 + 1e-12) => {
                        bad(format!("ridge_combination: Σ|weight| = {total} exceeds norm_bound = {r}"))
                    }
                    _ => Ok(()),
                }
            }
            Target::RandomRidgeCombination { terms, dim } if *terms == 0 || !(1..=2).contains(dim) => {
                bad("random_ridge_combination: needs terms ≥ 1 and dim ∈ {1, 2}".into())
            }
            _ => Ok(()),
        }
    }

    /// Replaces a random combination by its explicit terms.
    pub fn resolve(&self, seed: u64) -> Target {
        match self {
            Target::RandomRidgeCombination { terms, dim } => {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                let raw: Vec<(f64, Vec<f64>, f64)> = (0..*terms)
                    .map(|_| {
                        let direction = if *dim == 1 {
                            vec![if rng.gen_bool(0.5) { 1.0 } else { -1.0 }]
                        } else {
                            let theta = rng.gen_range(0.0..std::f64::consts::TAU);
                            vec![theta.cos(), theta.sin()]
                        };
                        (rng.gen_range(0.05..1.0), direction, rng.gen_range(-1.0..=1.0))
                    })
                    .collect();
                let total: f64 = raw.iter().map(|r| r.0).sum();
                Target::RidgeCombination {
                    exponent: None,
                    terms: raw
                        .into_iter()
                        .map(|(w, direction, offset)| RidgeTerm { weight: w / total, direction, offset })
                        .collect(),
                    norm_bound: Some(1.0),
                }
            }
            other => other.clone(),
        }
    }

    /// Evaluates the target; `big_k` is the ridge exponent used when a ridge
    /// combination does not fix its own.
    pub fn eval(&self, x: &[f64], big_k: u32) -> f64 {
        match self {
            Target::Runge { a } => 1.0 / (1.0 + a * x[0] * x[0]),
            Target::Exp => x[0].exp(),
            Target::AbsPower { r } => x[0].abs().powi(*r as i32),
            Target::Polynomial { coefficients } => coefficients.iter().rev().fold(0.0, |acc, c| acc * x[0] + c),
            Target::RidgeCombination { exponent, terms, .. } => {
                let k = exponent.unwrap_or(big_k);
                terms
                    .iter()
                    .map(|t| {
                        let z: f64 = t.direction.iter().zip(x).map(|(w, xi)| w * xi).sum::<f64>() + t.offset;
                        t.weight * sigma_f64(z, k)
                    })
                    .sum()
            }
            Target::RandomRidgeCombination { .. } => panic!("resolve a random ridge combination before evaluating it"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn runge_reference_ratio() {
        let TargetClass::Analytic { rho: Some(rho) } = (Target::Runge { a: 25.0 }).class() else { panic!() };
        assert!((rho - 5.0 / (1.0 + 26f64.sqrt())).abs() < 1e-15);
        assert!((rho - 0.8198).abs() < 1e-4);
    }

    #[test]
    fn parse_and_validate() {
        let t: Target = serde_json::from_str(r#"{"kind":"abs_power","r":3}"#).unwrap();
        assert_eq!(t, Target::AbsPower { r: 3 });
        assert!(serde_json::from_str::<Target>(r#"{"kind":"runge","a":25,"b":1}"#).is_err());
        assert!(Target::Runge { a: -1.0 }.validate().is_err());
        assert!(Target::AbsPower { r: 2 }.validate().is_err());
        let bad = Target::RidgeCombination {
            exponent: Some(2),
            terms: vec![RidgeTerm { weight: 2.0, direction: vec![1.0], offset: 0.0 }],
            norm_bound: Some(1.0),
        };
        assert!(bad.validate().is_err());
    }

    #[test]
    fn random_combination_is_convex_and_seeded() {
        let t = Target::RandomRidgeCombination { terms: 20, dim: 2 };
        let a = t.resolve(4);
        assert_eq!(a, t.resolve(4));
        assert_ne!(a, t.resolve(5));
        a.validate().unwrap();
        let Target::RidgeCombination { terms, .. } = &a else { panic!() };
        assert!((terms.iter().map(|t| t.weight).sum::<f64>() - 1.0).abs() < 1e-12);
        assert!(terms.iter().all(|t| t.weight > 0.0));
    }

    #[test]
    fn values() {
        assert_eq!(Target::Runge { a: 25.0 }.eval(&[0.2], 0), 0.5);
        assert_eq!(Target::AbsPower { r: 3 }.eval(&[-0.5], 0), 0.125);
        assert_eq!(Target::Polynomial { coefficients: vec![1.0, 0.0, 2.0] }.eval(&[3.0], 0), 19.0);
        let ridge = Target::RidgeCombination {
            exponent: None,
            terms: vec![RidgeTerm { weight: 0.5, direction: vec![0.6, 0.8], offset: -0.2 }],
            norm_bound: None,
        };
        assert!((ridge.eval(&[1.0, 0.5], 2) - 0.5 * 0.8 * 0.8).abs() < 1e-15);
        assert_eq!(ridge.eval(&[-1.0, 0.0], 2), 0.0);
    }
}
