//! Orthogonal greedy fitting of shallow ReLU^K networks over a discretized
//! ridge dictionary.

use std::f64::consts::TAU;

use serde::Serialize;

use super::quadrature::Grid;
use super::LabError;
use crate::exact::rational::from_f64;
use crate::exact::{SparseMatrix, SparseVector};
use crate::network::{sigma_f64, ShallowNetwork};

pub const MAX_WIDTH: usize = 64;
pub const DIRECTIONS: usize = 64;
pub const OFFSETS: usize = 33;
const DROP_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DictionaryElement {
    pub direction: Vec<f64>,
    pub offset: f64,
}

/// Ridge functions `σ_K(ω·x + b)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Dictionary {
    pub exponent: u32,
    pub elements: Vec<DictionaryElement>,
}

impl Dictionary {
    /// Equi-angular directions (d = 2) or `±1` (d = 1) against 33 uniform
    /// offsets in `[−1, 1]`.
    pub fn standard(dim: usize, exponent: u32) -> Dictionary {
        let directions: Vec<Vec<f64>> = if dim == 1 {
            vec![vec![1.0], vec![-1.0]]
        } else {
            (0..DIRECTIONS)
                .map(|j| {
                    let theta = TAU * j as f64 / DIRECTIONS as f64;
                    vec![theta.cos(), theta.sin()]
                })
                .collect()
        };
        let mut elements = Vec::with_capacity(directions.len() * OFFSETS);
        for direction in &directions {
            for i in 0..OFFSETS {
                let offset = -1.0 + 2.0 * i as f64 / (OFFSETS - 1) as f64;
                elements.push(DictionaryElement { direction: direction.clone(), offset });
            }
        }
        Dictionary { exponent, elements }
    }

    pub fn eval(&self, i: usize, x: &[f64]) -> f64 {
        let e = &self.elements[i];
        let z: f64 = e.direction.iter().zip(x).map(|(w, xi)| w * xi).sum::<f64>() + e.offset;
        sigma_f64(z, self.exponent)
    }

    fn sample(&self, i: usize, grid: &Grid) -> Vec<f64> {
        grid.points.iter().map(|p| self.eval(i, p)).collect()
    }
}

#[derive(Debug, Clone)]
pub struct GreedyFit {
    pub widths: Vec<usize>,
    pub networks: Vec<ShallowNetwork>,
    /// Weighted L² norm of the residual at each emitted width.
    pub residuals: Vec<f64>,
    /// Dictionary indices in selection order.
    pub selected: Vec<usize>,
    /// Elements dropped because they were numerically in the span already.
    pub dropped: Vec<usize>,
}

fn inner(w: &[f64], u: &[f64], v: &[f64]) -> f64 {
    w.iter().zip(u).zip(v).map(|((w, u), v)| w * u * v).sum()
}

/// Selects elements by `|⟨r, g⟩|/‖g‖` and re-projects onto everything chosen
/// so far, emitting a network at each requested width.
pub fn greedy_fit(grid: &Grid, values: &[f64], dict: &Dictionary, widths: &[usize]) -> Result<GreedyFit, LabError> {
    if widths.is_empty() || widths[0] == 0 || widths.windows(2).any(|w| w[0] >= w[1]) {
        return Err(LabError::Config("widths must be positive and strictly increasing".into()));
    }
    let max_width = *widths.last().expect("non-empty");
    if max_width > MAX_WIDTH {
        return Err(LabError::Config(format!("width {max_width} exceeds {MAX_WIDTH}")));
    }
    let w = &grid.weights;
    let norms: Vec<f64> = (0..dict.elements.len()).map(|i| {
        let g = dict.sample(i, grid);
        inner(w, &g, &g).sqrt()
    }).collect();
    let mut residual = values.to_vec();
    let mut q: Vec<Vec<f64>> = Vec::new();
    let mut r_cols: Vec<Vec<f64>> = Vec::new();
    let mut z: Vec<f64> = Vec::new();
    let mut used = vec![false; dict.elements.len()];
    let mut fit = GreedyFit { widths: Vec::new(), networks: Vec::new(), residuals: Vec::new(), selected: Vec::new(), dropped: Vec::new() };

    while fit.selected.len() < max_width {
        let mut best: Option<(usize, f64)> = None;
        for (i, &norm) in norms.iter().enumerate() {
            if used[i] || norm == 0.0 {
                continue;
            }
            let g = dict.sample(i, grid);
            let score = inner(w, &residual, &g).abs() / norm;
            if best.is_none_or(|(_, s)| score > s) {
                best = Some((i, score));
            }
        }
        let Some((i, _)) = best else {
            return Err(LabError::Degenerate(format!(
                "dictionary exhausted at width {} ({} dropped)",
                fit.selected.len(),
                fit.dropped.len()
            )));
        };
        used[i] = true;
        let g = dict.sample(i, grid);
        let mut v = g.clone();
        let mut col = vec![0.0; q.len() + 1];
        for _ in 0..2 {
            for (j, qj) in q.iter().enumerate() {
                let h = inner(w, qj, &v);
                col[j] += h;
                for (vi, qi) in v.iter_mut().zip(qj) {
                    *vi -= h * qi;
                }
            }
        }
        let rest = inner(w, &v, &v).sqrt();
        if rest < DROP_TOLERANCE * norms[i] {
            fit.dropped.push(i);
            continue;
        }
        col[q.len()] = rest;
        v.iter_mut().for_each(|x| *x /= rest);
        let zj = inner(w, &v, values);
        for (ri, vi) in residual.iter_mut().zip(&v) {
            *ri -= zj * vi;
        }
        q.push(v);
        r_cols.push(col);
        z.push(zj);
        fit.selected.push(i);

        let n = fit.selected.len();
        if widths.contains(&n) {
            // Back substitution R a = z.
            let mut a = vec![0.0; n];
            for row in (0..n).rev() {
                let s: f64 = (row + 1..n).map(|c| r_cols[c][row] * a[c]).sum();
                a[row] = (z[row] - s) / r_cols[row][row];
            }
            fit.networks.push(network(dict, &fit.selected, &a, grid.dim)?);
            fit.widths.push(n);
            fit.residuals.push(inner(w, &residual, &residual).sqrt());
        }
    }
    Ok(fit)
}

fn network(dict: &Dictionary, selected: &[usize], a: &[f64], dim: usize) -> Result<ShallowNetwork, LabError> {
    let exact = |x: f64| from_f64(x).ok_or_else(|| LabError::Degenerate(format!("non-finite fitted value {x}")));
    let n = selected.len();
    let mut weights = SparseMatrix::zeros(n, dim);
    let mut bias = SparseVector::zeros(n);
    let mut output = SparseVector::zeros(n);
    for (m, (&i, &c)) in selected.iter().zip(a).enumerate() {
        let e = &dict.elements[i];
        for (j, &wj) in e.direction.iter().enumerate() {
            weights.insert(m, j, exact(wj)?);
        }
        bias.insert(m, exact(e.offset)?);
        output.insert(m, exact(c)?);
    }
    Ok(ShallowNetwork::new(dict.exponent, weights, bias, output))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::network::Network;
    use crate::points::halton_disk_f64;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn sample(grid: &Grid, f: impl Fn(&[f64]) -> f64) -> Vec<f64> {
        grid.points.iter().map(|p| f(p)).collect()
    }

    #[test]
    fn dictionary_shape() {
        let d2 = Dictionary::standard(2, 3);
        assert_eq!(d2.elements.len(), 64 * 33);
        assert!(d2.elements.iter().all(|e| (e.direction[0].hypot(e.direction[1]) - 1.0).abs() < 1e-12));
        assert_eq!(d2.elements[32].offset, 1.0);
        assert_eq!(Dictionary::standard(1, 2).elements.len(), 66);
    }

    #[test]
    fn single_element_is_recovered_at_width_one() {
        for k in [1u32, 2, 4] {
            let dict = Dictionary::standard(2, k);
            let grid = Grid::sup_grid(2);
            let target = 200;
            let values = sample(&grid, |x| dict.eval(target, x));
            let fit = greedy_fit(&grid, &values, &dict, &[1]).unwrap();
            assert_eq!(fit.selected, vec![target]);
            assert!(fit.residuals[0] <= 1e-10, "K={k}: {}", fit.residuals[0]);
        }
    }

    #[test]
    fn two_element_combination_is_recovered_in_span() {
        let dict = Dictionary::standard(2, 3);
        let grid = Grid::sup_grid(2);
        let (a, b) = (5, 16 * 33 + 20);
        let values = sample(&grid, |x| 0.5 * dict.eval(a, x) + 0.5 * dict.eval(b, x));
        let fit = greedy_fit(&grid, &values, &dict, &[1, 2]).unwrap();
        assert!(fit.residuals[1] <= 1e-8, "{:?}", fit.residuals);
        let mut sel = fit.selected.clone();
        sel.sort();
        assert_eq!(sel, vec![a, b]);
        // The emitted network reproduces the target.
        let net = Network::Shallow(fit.networks[1].clone());
        for p in halton_disk_f64(20) {
            let want = 0.5 * dict.eval(a, &p) + 0.5 * dict.eval(b, &p);
            assert!((net.eval_f64(&p).unwrap() - want).abs() < 1e-10);
        }
    }

    #[test]
    fn random_convex_combination_error_decreases() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let grid = Grid::sup_grid(2);
        let terms: Vec<(f64, f64, f64)> = (0..20)
            .map(|_| (rng.gen_range(0.0..1.0), rng.gen_range(0.0..TAU), rng.gen_range(-1.0..1.0)))
            .collect();
        let total: f64 = terms.iter().map(|t| t.0).sum();
        let values = sample(&grid, |x| {
            terms.iter().map(|(w, th, b)| w / total * sigma_f64(th.cos() * x[0] + th.sin() * x[1] + b, 4)).sum()
        });
        let widths: Vec<usize> = (1..=12).collect();
        let fit = greedy_fit(&grid, &values, &Dictionary::standard(2, 4), &widths).unwrap();
        assert_eq!(fit.networks.len(), 12);
        assert!(fit.residuals.windows(2).all(|r| r[1] <= r[0]), "{:?}", fit.residuals);
        assert!(fit.residuals[11] < 0.2 * fit.residuals[0]);
    }

    #[test]
    fn duplicates_are_dropped() {
        let element = DictionaryElement { direction: vec![1.0], offset: 0.0 };
        let dict = Dictionary { exponent: 1, elements: vec![element.clone(), element] };
        let grid = Grid::sup_grid(1);
        let values = sample(&grid, |x| 3.0 * sigma_f64(x[0], 1));
        let fit = greedy_fit(&grid, &values, &dict, &[1]).unwrap();
        assert!(fit.residuals[0] < 1e-12);
        assert!((crate::exact::rational::to_f64(&fit.networks[0].output.get(0)) - 3.0).abs() < 1e-12);
        let msg = greedy_fit(&grid, &values, &dict, &[2]).unwrap_err().to_string();
        assert!(msg.contains("exhausted at width 1") && msg.contains("1 dropped"), "{msg}");
    }

    #[test]
    fn width_schedule_is_validated() {
        let grid = Grid::sup_grid(1);
        let dict = Dictionary::standard(1, 2);
        let values = vec![0.0; grid.points.len()];
        assert!(greedy_fit(&grid, &values, &dict, &[]).is_err());
        assert!(greedy_fit(&grid, &values, &dict, &[2, 2]).is_err());
        assert!(greedy_fit(&grid, &values, &dict, &[65]).is_err());
    }
}
