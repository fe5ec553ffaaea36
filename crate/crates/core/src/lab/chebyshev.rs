//! Chebyshev interpolation in one and two variables.

use std::f64::consts::PI;

use num_bigint::BigInt;
use num_traits::Zero;

use super::LabError;
use crate::exact::rational::{from_bigint, from_f64};
use crate::exact::{MultiIndex, Polynomial};

pub const MAX_DEGREE: u32 = 200;

/// `Σ c_α T_{α₁}(x₁)…T_{α_d}(x_d)` with float coefficients.
#[derive(Debug, Clone, PartialEq)]
pub struct ChebyshevFit {
    pub dim: usize,
    pub degree: u32,
    pub coefficients: Vec<(Vec<u32>, f64)>,
}

/// First-kind nodes `cos(π(j + ½)/(n+1))`.
pub fn chebyshev_nodes(n: u32) -> Vec<f64> {
    let m = f64::from(n + 1);
    (0..=n).map(|j| (PI * (f64::from(j) + 0.5) / m).cos()).collect()
}

// cos(i θ_j) scaled by the discrete orthogonality weights.
fn transform_table(n: u32) -> Vec<Vec<f64>> {
    let m = f64::from(n + 1);
    (0..=n)
        .map(|i| {
            let w = if i == 0 { 1.0 / m } else { 2.0 / m };
            (0..=n).map(|j| w * (PI * f64::from(i) * (f64::from(j) + 0.5) / m).cos()).collect()
        })
        .collect()
}

fn checked(v: f64, x: &[f64]) -> Result<f64, LabError> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(LabError::Evaluation(format!("target is not finite at {x:?}")))
    }
}

/// Interpolant at the `(n+1)^d` tensor Chebyshev points; for `d = 2` the
/// tensor coefficients are truncated to total degree `n`.
pub fn chebyshev_fit(f: impl Fn(&[f64]) -> f64, dim: usize, degree: u32) -> Result<ChebyshevFit, LabError> {
    if degree > MAX_DEGREE {
        return Err(LabError::Config(format!("degree {degree} exceeds {MAX_DEGREE}")));
    }
    let nodes = chebyshev_nodes(degree);
    let table = transform_table(degree);
    let n = degree as usize;
    let coefficients = match dim {
        1 => {
            let values = nodes.iter().map(|&x| checked(f(&[x]), &[x])).collect::<Result<Vec<_>, _>>()?;
            (0..=n).map(|i| (vec![i as u32], table[i].iter().zip(&values).map(|(c, v)| c * v).sum())).collect()
        }
        2 => {
            let mut values = vec![vec![0.0; n + 1]; n + 1];
            for (a, &x) in nodes.iter().enumerate() {
                for (b, &y) in nodes.iter().enumerate() {
                    values[a][b] = checked(f(&[x, y]), &[x, y])?;
                }
            }
            // Transform along y, then along x.
            let half: Vec<Vec<f64>> = values
                .iter()
                .map(|row| (0..=n).map(|j| table[j].iter().zip(row).map(|(c, v)| c * v).sum()).collect())
                .collect();
            let mut out = Vec::new();
            for i in 0..=n {
                for j in 0..=n - i {
                    let c = (0..=n).map(|a| table[i][a] * half[a][j]).sum();
                    out.push((vec![i as u32, j as u32], c));
                }
            }
            out
        }
        _ => return Err(LabError::Config(format!("Chebyshev fits need d ∈ {{1, 2}}, got {dim}"))),
    };
    Ok(ChebyshevFit { dim, degree, coefficients })
}

fn chebyshev_values(x: f64, n: usize) -> Vec<f64> {
    let mut t = vec![1.0; n + 1];
    if n >= 1 {
        t[1] = x;
    }
    for i in 2..=n {
        t[i] = 2.0 * x * t[i - 1] - t[i - 2];
    }
    t
}

/// Integer monomial coefficients of `T_0..T_n`.
pub fn chebyshev_monomials(n: usize) -> Vec<Vec<BigInt>> {
    let mut t: Vec<Vec<BigInt>> = vec![vec![BigInt::from(1)]];
    if n >= 1 {
        t.push(vec![BigInt::zero(), BigInt::from(1)]);
    }
    for i in 2..=n {
        let mut next = vec![BigInt::zero(); i + 1];
        for (j, c) in t[i - 1].iter().enumerate() {
            next[j + 1] += c * 2;
        }
        for (j, c) in t[i - 2].iter().enumerate() {
            next[j] -= c;
        }
        t.push(next);
    }
    t
}

impl ChebyshevFit {
    pub fn eval(&self, x: &[f64]) -> f64 {
        let n = self.degree as usize;
        if self.dim == 1 {
            // Clenshaw, coefficients stored in order.
            let (mut b1, mut b2) = (0.0, 0.0);
            for (_, c) in self.coefficients.iter().skip(1).rev() {
                let b = c + 2.0 * x[0] * b1 - b2;
                b2 = b1;
                b1 = b;
            }
            self.coefficients[0].1 + x[0] * b1 - b2
        } else {
            let tx = chebyshev_values(x[0], n);
            let ty = chebyshev_values(x[1], n);
            self.coefficients.iter().map(|(a, c)| c * tx[a[0] as usize] * ty[a[1] as usize]).sum()
        }
    }

    /// The exact monomial form of the series with the float coefficients
    /// taken at their binary values.
    pub fn polynomial(&self) -> Polynomial {
        let t = chebyshev_monomials(self.degree as usize);
        let mut p = Polynomial::zero(self.dim);
        for (alpha, c) in &self.coefficients {
            if *c == 0.0 {
                continue;
            }
            let c = from_f64(*c).expect("finite coefficient");
            if self.dim == 1 {
                for (j, tj) in t[alpha[0] as usize].iter().enumerate() {
                    if !tj.is_zero() {
                        p.add_term(MultiIndex::new(vec![j as u32]), &c * from_bigint(tj.clone()));
                    }
                }
            } else {
                for (a, ta) in t[alpha[0] as usize].iter().enumerate() {
                    for (b, tb) in t[alpha[1] as usize].iter().enumerate() {
                        if !ta.is_zero() && !tb.is_zero() {
                            p.add_term(MultiIndex::new(vec![a as u32, b as u32]), &c * from_bigint(ta * tb));
                        }
                    }
                }
            }
        }
        p
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::rational::{int, to_f64};

    // Barycentric Lagrange interpolation through the same nodes.
    fn barycentric(nodes: &[f64], values: &[f64], x: f64) -> f64 {
        let m = nodes.len();
        let (mut num, mut den) = (0.0, 0.0);
        for j in 0..m {
            if x == nodes[j] {
                return values[j];
            }
            let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
            let w = sign * (PI * (j as f64 + 0.5) / m as f64).sin() / (x - nodes[j]);
            num += w * values[j];
            den += w;
        }
        num / den
    }

    fn runge(x: &[f64]) -> f64 {
        1.0 / (1.0 + 25.0 * x[0] * x[0])
    }

    fn dense_grid() -> impl Iterator<Item = f64> {
        (0..4096).map(|i| -1.0 + (2 * i + 1) as f64 / 4096.0)
    }

    #[test]
    fn cubic_is_reproduced() {
        let fit = chebyshev_fit(|x| x[0].powi(3), 1, 3).unwrap();
        let p = fit.polynomial();
        for j in 0..=3u32 {
            let want = if j == 3 { 1.0 } else { 0.0 };
            assert!((to_f64(&p.coefficient(&MultiIndex::new(vec![j]))) - want).abs() <= 1e-12);
        }
    }

    #[test]
    fn constant_is_degree_zero() {
        let fit = chebyshev_fit(|_| 0.75, 1, 0).unwrap();
        assert_eq!(fit.polynomial(), Polynomial::constant(1, from_f64(0.75).unwrap()));
        let fit = chebyshev_fit(|_| -2.0, 2, 0).unwrap();
        assert_eq!(fit.polynomial(), Polynomial::constant(2, int(-2)));
    }

    #[test]
    fn runge_matches_barycentric_oracle() {
        for n in [4u32, 8, 16, 32] {
            let fit = chebyshev_fit(runge, 1, n).unwrap();
            let nodes = chebyshev_nodes(n);
            let values: Vec<f64> = nodes.iter().map(|&x| runge(&[x])).collect();
            let mut sup = 0.0f64;
            for x in dense_grid() {
                let oracle = barycentric(&nodes, &values, x);
                assert!((fit.eval(&[x]) - oracle).abs() < 1e-12, "n={n} x={x}");
                sup = sup.max((oracle - runge(&[x])).abs());
            }
            if n == 8 {
                assert!((0.05..=0.2).contains(&sup), "sup error {sup}");
            }
        }
    }

    #[test]
    fn monomial_form_agrees_with_clenshaw() {
        let fit = chebyshev_fit(runge, 1, 12).unwrap();
        let p = fit.polynomial();
        for x in [-0.9, -0.3, 0.0, 0.41, 0.77] {
            assert!((p.eval_f64(&[x]) - fit.eval(&[x])).abs() < 1e-10);
        }
        let fit2 = chebyshev_fit(|x| (x[0] + 2.0 * x[1]).exp(), 2, 9).unwrap();
        let p2 = fit2.polynomial();
        assert_eq!(p2.degree(), 9);
        for pt in [[0.1, -0.4], [0.5, 0.5], [-0.7, 0.2]] {
            assert!((p2.eval_f64(&pt) - fit2.eval(&pt)).abs() < 1e-9);
            assert!((fit2.eval(&pt) - (pt[0] + 2.0 * pt[1]).exp()).abs() < 1e-3);
        }
    }

    #[test]
    fn two_dimensional_polynomials_are_reproduced() {
        let f = |x: &[f64]| 1.0 - 2.0 * x[0] * x[1] + x[1].powi(3);
        let fit = chebyshev_fit(f, 2, 3).unwrap();
        for pt in [[0.3, -0.2], [-0.6, 0.6], [0.0, 1.0]] {
            assert!((fit.eval(&pt) - f(&pt)).abs() < 1e-13);
        }
    }

    #[test]
    fn chebyshev_polynomials() {
        let t = chebyshev_monomials(4);
        let t4: Vec<i64> = t[4].iter().map(|c| i64::try_from(c).unwrap()).collect();
        assert_eq!(t4, vec![1, 0, -8, 0, 8]);
    }

    #[test]
    fn errors() {
        assert!(chebyshev_fit(runge, 1, 201).is_err());
        assert!(chebyshev_fit(runge, 3, 2).is_err());
        assert!(chebyshev_fit(|_| f64::NAN, 1, 2).is_err());
    }
}
