//! Evaluation grids and quadrature rules on the unit ball for d ∈ {1, 2}.

use std::f64::consts::PI;

use crate::exact::rational::Rational;
use crate::points::halton_disk_f64;

pub const GRID_SIZE: usize = 4096;

/// Gauss–Legendre nodes and weights on `[−1, 1]`.
pub fn gauss_legendre(m: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; m];
    let mut weights = vec![0.0; m];
    for i in 0..m.div_ceil(2) {
        let mut x = (PI * (i as f64 + 0.75) / (m as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for j in 2..=m {
                let p2 = ((2 * j - 1) as f64 * x * p1 - (j - 1) as f64 * p0) / j as f64;
                p0 = p1;
                p1 = p2;
            }
            dp = m as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[m - 1 - i] = x;
        weights[i] = w;
        weights[m - 1 - i] = w;
    }
    (nodes, weights)
}

/// Cell midpoints `−1 + (2i+1)/count`.
pub fn midpoint_grid(count: usize) -> Vec<f64> {
    (0..count).map(|i| -1.0 + (2 * i + 1) as f64 / count as f64).collect()
}

/// Points with weights estimating `∫_B g` and a dense point set for sup norms.
#[derive(Debug, Clone)]
pub struct Grid {
    pub dim: usize,
    pub points: Vec<Vec<f64>>,
    pub weights: Vec<f64>,
}

impl Grid {
    /// 4096 midpoints (d = 1) or 4096 Halton points of the disk (d = 2),
    /// weighted for the domain's measure.
    pub fn sup_grid(dim: usize) -> Grid {
        let points: Vec<Vec<f64>> = match dim {
            1 => midpoint_grid(GRID_SIZE).into_iter().map(|x| vec![x]).collect(),
            _ => halton_disk_f64(GRID_SIZE).into_iter().map(|p| p.to_vec()).collect(),
        };
        let w = if dim == 1 { 2.0 } else { PI } / GRID_SIZE as f64;
        Grid { dim, weights: vec![w; points.len()], points }
    }

    /// Gauss–Legendre with `m` nodes (d = 1); the Halton disk rule (d = 2).
    pub fn l2_rule(dim: usize, m: usize) -> Grid {
        if dim == 1 {
            let (nodes, weights) = gauss_legendre(m);
            Grid { dim, points: nodes.into_iter().map(|x| vec![x]).collect(), weights }
        } else {
            Grid::sup_grid(dim)
        }
    }

    pub fn rational_points(&self) -> Vec<Vec<Rational>> {
        self.points
            .iter()
            .map(|p| p.iter().map(|&x| Rational::from_float(x).expect("finite grid point")).collect())
            .collect()
    }

    pub fn l2_norm(&self, values: &[f64]) -> f64 {
        self.weights.iter().zip(values).map(|(w, v)| w * v * v).sum::<f64>().sqrt()
    }
}

pub fn sup_norm(values: &[f64]) -> f64 {
    values.iter().fold(0.0, |m, v| m.max(v.abs()))
}
