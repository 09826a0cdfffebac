use std::fmt::Write as _;

use nalgebra::DMatrix;

use crate::error::{Error, Result};

/// Symmetric sparse matrix. Only the lower triangle is supplied; the full
/// pattern is kept internally (compressed rows) for fast products.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseSymmetric {
    n: usize,
    row_ptr: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<f64>,
}

impl SparseSymmetric {
    /// Builds from `(row, col, value)` triplets of the lower triangle;
    /// duplicates are summed and upper-triangle triplets are mirrored.
    pub fn from_lower_triplets(n: usize, mut triplets: Vec<(usize, usize, f64)>) -> Result<Self> {
        for t in triplets.iter_mut() {
            if t.0 >= n || t.1 >= n {
                return Err(Error::InvalidInput(format!("entry ({}, {}) outside dimension {n}", t.0, t.1)));
            }
            if !t.2.is_finite() {
                return Err(Error::InvalidInput(format!("non-finite entry at ({}, {})", t.0, t.1)));
            }
            if t.0 < t.1 {
                std::mem::swap(&mut t.0, &mut t.1);
            }
        }
        triplets.sort_by(|a, b| (a.0, a.1).cmp(&(b.0, b.1)));
        let mut lower: Vec<(usize, usize, f64)> = Vec::with_capacity(triplets.len());
        for (i, j, v) in triplets {
            match lower.last_mut() {
                Some(last) if last.0 == i && last.1 == j => last.2 += v,
                _ => lower.push((i, j, v)),
            }
        }
        let mut count = vec![0usize; n + 1];
        for &(i, j, _) in &lower {
            count[i + 1] += 1;
            if i != j {
                count[j + 1] += 1;
            }
        }
        for i in 0..n {
            count[i + 1] += count[i];
        }
        let row_ptr = count.clone();
        let mut fill = count;
        let mut cols = vec![0; row_ptr[n]];
        let mut vals = vec![0.0; row_ptr[n]];
        for &(i, j, v) in &lower {
            cols[fill[i]] = j;
            vals[fill[i]] = v;
            fill[i] += 1;
            if i != j {
                cols[fill[j]] = i;
                vals[fill[j]] = v;
                fill[j] += 1;
            }
        }
        for i in 0..n {
            let (a, b) = (row_ptr[i], row_ptr[i + 1]);
            let mut row: Vec<(usize, f64)> = cols[a..b].iter().copied().zip(vals[a..b].iter().copied()).collect();
            row.sort_by_key(|e| e.0);
            for (k, (c, v)) in row.into_iter().enumerate() {
                cols[a + k] = c;
                vals[a + k] = v;
            }
        }
        Ok(SparseSymmetric { n, row_ptr, cols, vals })
    }

    pub fn from_dense(a: &DMatrix<f64>) -> Result<Self> {
        let mut t = Vec::new();
        for i in 0..a.nrows() {
            for j in 0..=i {
                if a[(i, j)] != 0.0 {
                    t.push((i, j, a[(i, j)]));
                }
            }
        }
        Self::from_lower_triplets(a.nrows(), t)
    }

    pub fn identity(n: usize) -> Self {
        Self::from_lower_triplets(n, (0..n).map(|i| (i, i, 1.0)).collect()).unwrap()
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Stored entries of the lower triangle, row by row.
    pub fn lower_entries(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        (0..self.n).flat_map(move |i| self.row(i).filter(move |&(j, _)| j <= i).map(move |(j, v)| (i, j, v)))
    }

    pub fn nnz_lower(&self) -> usize {
        self.lower_entries().count()
    }

    /// `(column, value)` pairs of row `i` in increasing column order.
    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let r = self.row_ptr[i]..self.row_ptr[i + 1];
        self.cols[r.clone()].iter().copied().zip(self.vals[r].iter().copied())
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let r = self.row_ptr[i]..self.row_ptr[i + 1];
        match self.cols[r.clone()].binary_search(&j) {
            Ok(k) => self.vals[r.start + k],
            Err(_) => 0.0,
        }
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.get(i, i)).collect()
    }

    pub fn trace(&self) -> f64 {
        self.diagonal().iter().sum()
    }

    pub fn mul_vec_into(&self, x: &[f64], y: &mut [f64]) {
        for (i, yi) in y.iter_mut().enumerate().take(self.n) {
            let mut s = 0.0;
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                s += self.vals[k] * x[self.cols[k]];
            }
            *yi = s;
        }
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.n];
        self.mul_vec_into(x, &mut y);
        y
    }

    /// `x^T A y`.
    pub fn bilinear(&self, x: &[f64], y: &[f64]) -> f64 {
        self.mul_vec(y).iter().zip(x).map(|(a, b)| a * b).sum()
    }

    /// `a * self + b * other`.
    pub fn combine(&self, a: f64, other: &SparseSymmetric, b: f64) -> Result<Self> {
        if self.n != other.n {
            return Err(Error::InvalidInput("dimension mismatch".into()));
        }
        let t = self
            .lower_entries()
            .map(|(i, j, v)| (i, j, a * v))
            .chain(other.lower_entries().map(|(i, j, v)| (i, j, b * v)))
            .collect();
        Self::from_lower_triplets(self.n, t)
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let mut d = DMatrix::zeros(self.n, self.n);
        for i in 0..self.n {
            for (j, v) in self.row(i) {
                d[(i, j)] = v;
            }
        }
        d
    }

    /// Coordinate text export: `i j value`, lower triangle only.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        for (i, j, v) in self.lower_entries() {
            writeln!(s, "{i} {j} {v:.16e}").unwrap();
        }
        s
    }

    /// Column indices adjacent to `i` (excluding `i`).
    pub(crate) fn neighbors(&self, i: usize) -> impl Iterator<Item = usize> + '_ {
        self.cols[self.row_ptr[i]..self.row_ptr[i + 1]].iter().copied().filter(move |&j| j != i)
    }

    pub(crate) fn degree(&self, i: usize) -> usize {
        self.row_ptr[i + 1] - self.row_ptr[i]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn triplets_sum_and_mirror() {
        let a =
            SparseSymmetric::from_lower_triplets(3, vec![(1, 0, 2.0), (0, 1, 1.0), (2, 2, 4.0), (0, 0, 1.0)]).unwrap();
        assert_eq!(a.get(0, 1), 3.0);
        assert_eq!(a.get(1, 0), 3.0);
        assert_eq!(a.mul_vec(&[1.0, 1.0, 1.0]), vec![4.0, 3.0, 4.0]);
        assert_eq!(a.lower_entries().collect::<Vec<_>>(), vec![(0, 0, 1.0), (1, 0, 3.0), (2, 2, 4.0)]);
        assert_eq!(a.to_text().lines().count(), 3);
        assert!(SparseSymmetric::from_lower_triplets(2, vec![(0, 0, f64::NAN)]).is_err());
    }
}
