//! Dense exact matrices and pivoted Gauss–Jordan elimination.

use num_traits::{One, Signed, Zero};

use super::rational::Rational;
use super::ExactError;

pub type ExactVector = Vec<Rational>;

/// Row-major rational matrix.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExactMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Rational>,
}

impl ExactMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        ExactMatrix { rows, cols, data: vec![Rational::zero(); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.set(i, i, Rational::one());
        }
        m
    }

    pub fn from_rows(rows: Vec<Vec<Rational>>) -> Result<Self, ExactError> {
        let nrows = rows.len();
        let ncols = rows.first().map_or(0, Vec::len);
        let mut data = Vec::with_capacity(nrows * ncols);
        for row in rows {
            if row.len() != ncols {
                return Err(ExactError::ShapeMismatch(format!(
                    "row of length {} in a matrix with {} columns",
                    row.len(),
                    ncols
                )));
            }
            data.extend(row);
        }
        Ok(ExactMatrix { rows: nrows, cols: ncols, data })
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Rational) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        ExactMatrix { rows, cols, data }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> &Rational {
        &self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: Rational) {
        self.data[i * self.cols + j] = v;
    }

    pub fn row(&self, i: usize) -> &[Rational] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> ExactVector {
        (0..self.rows).map(|i| self.get(i, j).clone()).collect()
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self.get(j, i).clone())
    }

    pub fn mul_vec(&self, v: &[Rational]) -> Result<ExactVector, ExactError> {
        if v.len() != self.cols {
            return Err(ExactError::ShapeMismatch(format!(
                "{}x{} matrix times vector of length {}",
                self.rows,
                self.cols,
                v.len()
            )));
        }
        Ok((0..self.rows)
            .map(|i| self.row(i).iter().zip(v).map(|(a, b)| a * b).sum())
            .collect())
    }

    pub fn mul(&self, other: &ExactMatrix) -> Result<ExactMatrix, ExactError> {
        if self.cols != other.rows {
            return Err(ExactError::ShapeMismatch(format!(
                "{}x{} times {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        Ok(Self::from_fn(self.rows, other.cols, |i, j| {
            (0..self.cols).map(|l| self.get(i, l) * other.get(l, j)).sum()
        }))
    }

    /// Largest absolute entry (`‖M‖_max`); zero for an empty matrix.
    pub fn max_abs(&self) -> Rational {
        self.data.iter().map(|x| x.abs()).max().unwrap_or_else(Rational::zero)
    }

    /// Inverse by Gauss–Jordan elimination with partial pivoting, i.e. all
    /// `n` unit right-hand sides solved in a single sweep.
    pub fn inverse(&self) -> Result<ExactMatrix, ExactError> {
        self.require_square()?;
        let n = self.rows;
        let rhs = ExactMatrix::identity(n);
        eliminate(self, rhs)
    }

    fn require_square(&self) -> Result<(), ExactError> {
        if self.rows != self.cols {
            return Err(ExactError::ShapeMismatch(format!(
                "expected a square matrix, found {}x{}",
                self.rows, self.cols
            )));
        }
        Ok(())
    }
}

/// Solves `M x = v` exactly.
pub fn solve_linear_exact(m: &ExactMatrix, v: &[Rational]) -> Result<ExactVector, ExactError> {
    m.require_square()?;
    if v.len() != m.rows {
        return Err(ExactError::ShapeMismatch(format!(
            "{}x{} system with right-hand side of length {}",
            m.rows,
            m.cols,
            v.len()
        )));
    }
    let rhs = ExactMatrix { rows: v.len(), cols: 1, data: v.to_vec() };
    Ok(eliminate(m, rhs)?.data)
}

// Reduces [m | rhs] to [I | m⁻¹ rhs]. The pivot in each column is the entry of
// largest absolute value among the remaining rows (first one on ties).
fn eliminate(m: &ExactMatrix, mut rhs: ExactMatrix) -> Result<ExactMatrix, ExactError> {
    let n = m.rows;
    let mut a = m.clone();
    for col in 0..n {
        let pivot = (col..n)
            .filter(|&r| !a.get(r, col).is_zero())
            .fold(None, |best: Option<usize>, r| match best {
                Some(b) if a.get(b, col).abs() >= a.get(r, col).abs() => Some(b),
                _ => Some(r),
            })
            .ok_or(ExactError::Singular)?;
        if pivot != col {
            swap_rows(&mut a, pivot, col);
            swap_rows(&mut rhs, pivot, col);
        }
        let inv = a.get(col, col).recip();
        scale_row(&mut a, col, &inv);
        scale_row(&mut rhs, col, &inv);
        for r in 0..n {
            if r == col || a.get(r, col).is_zero() {
                continue;
            }
            let factor = a.get(r, col).clone();
            sub_row_multiple(&mut a, r, col, &factor);
            sub_row_multiple(&mut rhs, r, col, &factor);
        }
    }
    Ok(rhs)
}

fn swap_rows(m: &mut ExactMatrix, i: usize, j: usize) {
    for c in 0..m.cols {
        m.data.swap(i * m.cols + c, j * m.cols + c);
    }
}

fn scale_row(m: &mut ExactMatrix, i: usize, s: &Rational) {
    for c in 0..m.cols {
        let idx = i * m.cols + c;
        if !m.data[idx].is_zero() {
            m.data[idx] *= s;
        }
    }
}

fn sub_row_multiple(m: &mut ExactMatrix, target: usize, source: usize, factor: &Rational) {
    for c in 0..m.cols {
        let src = &m.data[source * m.cols + c];
        if src.is_zero() {
            continue;
        }
        let delta = src * factor;
        m.data[target * m.cols + c] -= delta;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::rational::{int, ratio};
    use proptest::prelude::*;

    fn mat(rows: &[&[i64]]) -> ExactMatrix {
        ExactMatrix::from_rows(rows.iter().map(|r| r.iter().map(|&x| int(x)).collect()).collect()).unwrap()
    }

    #[test]
    fn identity_system() {
        let x = solve_linear_exact(&ExactMatrix::identity(3), &[int(1), int(2), int(3)]).unwrap();
        assert_eq!(x, vec![int(1), int(2), int(3)]);
    }

    #[test]
    fn transposed_b2_system() {
        let m = mat(&[&[1, 1, 1], &[-2, 0, 2], &[1, 0, 1]]);
        let x = solve_linear_exact(&m, &[int(0), int(1), int(0)]).unwrap();
        assert_eq!(x, vec![ratio(-1, 4), int(0), ratio(1, 4)]);
    }

    #[test]
    fn singular_system_is_reported() {
        let m = mat(&[&[1, 1], &[1, 1]]);
        assert!(matches!(solve_linear_exact(&m, &[int(1), int(5)]), Err(ExactError::Singular)));
        assert!(matches!(m.inverse(), Err(ExactError::Singular)));
    }

    #[test]
    fn shape_errors() {
        assert!(ExactMatrix::from_rows(vec![vec![int(1)], vec![int(1), int(2)]]).is_err());
        assert!(solve_linear_exact(&mat(&[&[1, 2]]), &[int(1)]).is_err());
        assert!(solve_linear_exact(&ExactMatrix::identity(2), &[int(1)]).is_err());
    }

    fn invertible_system() -> impl Strategy<Value = (ExactMatrix, ExactVector)> {
        (1usize..=8).prop_flat_map(|n| {
            let entries = prop::collection::vec((-9i64..=9, 1i64..=5), n * n);
            let xs = prop::collection::vec((-9i64..=9, 1i64..=5), n);
            (entries, xs).prop_filter_map("singular", move |(e, xs)| {
                let m = ExactMatrix::from_fn(n, n, |i, j| {
                    let (p, q) = e[i * n + j];
                    ratio(p, q)
                });
                m.inverse().ok()?;
                Some((m, xs.into_iter().map(|(p, q)| ratio(p, q)).collect()))
            })
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]
        #[test]
        fn solve_recovers_planted_solution((m, x) in invertible_system()) {
            let v = m.mul_vec(&x).unwrap();
            prop_assert_eq!(solve_linear_exact(&m, &v).unwrap(), x);
        }

        #[test]
        fn inverse_is_two_sided((m, _x) in invertible_system()) {
            let inv = m.inverse().unwrap();
            let n = m.rows();
            prop_assert_eq!(m.mul(&inv).unwrap(), ExactMatrix::identity(n));
            prop_assert_eq!(inv.mul(&m).unwrap(), ExactMatrix::identity(n));
        }
    }
}
