//! Sparse storage for network layers.
//!
//! The stored entries are the free parameters of a layer. A stored entry may
//! hold the value zero (a parameter that happens to vanish); entries that are
//! not stored are structurally zero.

use num_traits::{One, Signed, Zero};

use super::matrix::ExactMatrix;
use super::rational::Rational;
use super::ExactError;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SparseVector {
    len: usize,
    entries: Vec<(usize, Rational)>,
}

impl SparseVector {
    pub fn zeros(len: usize) -> Self {
        SparseVector { len, entries: Vec::new() }
    }

    /// Support = the nonzero values.
    pub fn from_dense(values: &[Rational]) -> Self {
        let entries = values
            .iter()
            .enumerate()
            .filter(|(_, v)| !v.is_zero())
            .map(|(i, v)| (i, v.clone()))
            .collect();
        SparseVector { len: values.len(), entries }
    }

    /// Every position is a stored parameter, zero or not.
    pub fn from_dense_full(values: Vec<Rational>) -> Self {
        SparseVector { len: values.len(), entries: values.into_iter().enumerate().collect() }
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// Stores `v` at `i`, replacing any previous value.
    pub fn insert(&mut self, i: usize, v: Rational) {
        assert!(i < self.len, "index {i} out of range for length {}", self.len);
        match self.entries.binary_search_by_key(&i, |e| e.0) {
            Ok(pos) => self.entries[pos].1 = v,
            Err(pos) => self.entries.insert(pos, (i, v)),
        }
    }

    pub fn get(&self, i: usize) -> Rational {
        self.entries
            .binary_search_by_key(&i, |e| e.0)
            .map(|pos| self.entries[pos].1.clone())
            .unwrap_or_else(|_| Rational::zero())
    }

    pub fn entries(&self) -> &[(usize, Rational)] {
        &self.entries
    }

    pub fn entries_mut(&mut self) -> impl Iterator<Item = &mut Rational> {
        self.entries.iter_mut().map(|e| &mut e.1)
    }

    pub fn support_len(&self) -> usize {
        self.entries.len()
    }

    pub fn nonzero_len(&self) -> usize {
        self.entries.iter().filter(|e| !e.1.is_zero()).count()
    }

    pub fn to_dense(&self) -> Vec<Rational> {
        let mut out = vec![Rational::zero(); self.len];
        for (i, v) in &self.entries {
            out[*i] = v.clone();
        }
        out
    }

    pub fn max_abs(&self) -> Rational {
        self.entries.iter().map(|e| e.1.abs()).max().unwrap_or_else(Rational::zero)
    }

    pub fn dot(&self, x: &[Rational]) -> Rational {
        sparse_dot(&self.entries, x)
    }

    pub fn scale(&self, s: &Rational) -> SparseVector {
        SparseVector {
            len: self.len,
            entries: self.entries.iter().map(|(i, v)| (*i, v * s)).collect(),
        }
    }

    /// Keeps only the positions for which `keep` holds, renumbered densely.
    pub fn select(&self, keep: &[bool]) -> SparseVector {
        let map = renumber(keep);
        SparseVector {
            len: keep.iter().filter(|&&k| k).count(),
            entries: self
                .entries
                .iter()
                .filter_map(|(i, v)| map[*i].map(|j| (j, v.clone())))
                .collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SparseMatrix {
    rows: usize,
    cols: usize,
    row_entries: Vec<Vec<(usize, Rational)>>,
}

impl SparseMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        SparseMatrix { rows, cols, row_entries: vec![Vec::new(); rows] }
    }

    /// Support = the nonzero values.
    pub fn from_rows(rows: &[Vec<Rational>], cols: usize) -> Result<Self, ExactError> {
        let mut m = Self::zeros(rows.len(), cols);
        for (i, row) in rows.iter().enumerate() {
            if row.len() != cols {
                return Err(ExactError::ShapeMismatch(format!(
                    "row {i} has length {}, expected {cols}",
                    row.len()
                )));
            }
            m.row_entries[i] = row
                .iter()
                .enumerate()
                .filter(|(_, v)| !v.is_zero())
                .map(|(j, v)| (j, v.clone()))
                .collect();
        }
        Ok(m)
    }

    pub fn from_dense(m: &ExactMatrix) -> Self {
        let rows: Vec<Vec<Rational>> = (0..m.rows()).map(|i| m.row(i).to_vec()).collect();
        Self::from_rows(&rows, m.cols()).expect("dense matrix rows have equal length")
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn insert(&mut self, i: usize, j: usize, v: Rational) {
        assert!(i < self.rows && j < self.cols, "entry ({i}, {j}) out of range");
        let row = &mut self.row_entries[i];
        match row.binary_search_by_key(&j, |e| e.0) {
            Ok(pos) => row[pos].1 = v,
            Err(pos) => row.insert(pos, (j, v)),
        }
    }

    pub fn get(&self, i: usize, j: usize) -> Rational {
        let row = &self.row_entries[i];
        row.binary_search_by_key(&j, |e| e.0)
            .map(|pos| row[pos].1.clone())
            .unwrap_or_else(|_| Rational::zero())
    }

    pub fn row(&self, i: usize) -> &[(usize, Rational)] {
        &self.row_entries[i]
    }

    pub fn entries(&self) -> impl Iterator<Item = (usize, usize, &Rational)> {
        self.row_entries
            .iter()
            .enumerate()
            .flat_map(|(i, row)| row.iter().map(move |(j, v)| (i, *j, v)))
    }

    pub fn entries_mut(&mut self) -> impl Iterator<Item = &mut Rational> {
        self.row_entries.iter_mut().flat_map(|row| row.iter_mut().map(|e| &mut e.1))
    }

    pub fn support_len(&self) -> usize {
        self.row_entries.iter().map(Vec::len).sum()
    }

    pub fn nonzero_len(&self) -> usize {
        self.entries().filter(|e| !e.2.is_zero()).count()
    }

    pub fn to_dense_rows(&self) -> Vec<Vec<Rational>> {
        (0..self.rows)
            .map(|i| {
                let mut row = vec![Rational::zero(); self.cols];
                for (j, v) in &self.row_entries[i] {
                    row[*j] = v.clone();
                }
                row
            })
            .collect()
    }

    pub fn max_abs(&self) -> Rational {
        self.entries().map(|e| e.2.abs()).max().unwrap_or_else(Rational::zero)
    }

    pub fn mul_vec(&self, x: &[Rational]) -> Vec<Rational> {
        assert_eq!(x.len(), self.cols, "sparse product shape");
        self.row_entries.iter().map(|row| sparse_dot(row, x)).collect()
    }

    pub fn scale(&self, s: &Rational) -> SparseMatrix {
        SparseMatrix {
            rows: self.rows,
            cols: self.cols,
            row_entries: self
                .row_entries
                .iter()
                .map(|row| row.iter().map(|(j, v)| (*j, v * s)).collect())
                .collect(),
        }
    }

    /// Restricts to the kept rows and columns, renumbered densely.
    pub fn select(&self, keep_rows: &[bool], keep_cols: &[bool]) -> SparseMatrix {
        let col_map = renumber(keep_cols);
        let row_entries: Vec<Vec<(usize, Rational)>> = self
            .row_entries
            .iter()
            .zip(keep_rows)
            .filter(|(_, &k)| k)
            .map(|(row, _)| {
                row.iter().filter_map(|(j, v)| col_map[*j].map(|nj| (nj, v.clone()))).collect()
            })
            .collect();
        SparseMatrix {
            rows: row_entries.len(),
            cols: keep_cols.iter().filter(|&&k| k).count(),
            row_entries,
        }
    }
}

fn sparse_dot(entries: &[(usize, Rational)], x: &[Rational]) -> Rational {
    let mut acc = Rational::zero();
    for (j, v) in entries {
        let xj = &x[*j];
        if v.is_zero() || xj.is_zero() {
            continue;
        }
        if v.is_one() {
            acc += xj;
        } else {
            acc += v * xj;
        }
    }
    acc
}

fn renumber(keep: &[bool]) -> Vec<Option<usize>> {
    let mut next = 0;
    keep.iter()
        .map(|&k| {
            k.then(|| {
                next += 1;
                next - 1
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::rational::{int, ratio};

    #[test]
    fn zero_valued_entries_stay_in_the_support() {
        let mut m = SparseMatrix::zeros(2, 3);
        m.insert(0, 1, int(0));
        m.insert(1, 2, ratio(1, 2));
        assert_eq!(m.support_len(), 2);
        assert_eq!(m.nonzero_len(), 1);
        assert_eq!(m.mul_vec(&[int(5), int(7), int(4)]), vec![int(0), int(2)]);
        assert_eq!(m.get(1, 2), ratio(1, 2));
        assert_eq!(m.get(0, 0), int(0));
    }

    #[test]
    fn dense_round_trip_and_selection() {
        let rows = vec![vec![int(1), int(0)], vec![int(0), int(0)], vec![int(-3), int(2)]];
        let m = SparseMatrix::from_rows(&rows, 2).unwrap();
        assert_eq!(m.to_dense_rows(), rows);
        assert_eq!(m.support_len(), 3);
        assert_eq!(m.max_abs(), int(3));
        let s = m.select(&[true, false, true], &[false, true]);
        assert_eq!(s.to_dense_rows(), vec![vec![int(0)], vec![int(2)]]);
        assert!(SparseMatrix::from_rows(&rows, 3).is_err());

        let v = SparseVector::from_dense(&[int(0), int(4), int(-1)]);
        assert_eq!(v.support_len(), 2);
        assert_eq!(v.select(&[false, true, true]).to_dense(), vec![int(4), int(-1)]);
        assert_eq!(v.dot(&[int(9), int(1), int(2)]), int(2));
    }
}
