//! Envelope (profile) Cholesky factorization under a reverse Cuthill-McKee
//! ordering.

use std::collections::VecDeque;

use super::sparse::SparseSymmetric;
use crate::error::{Error, Result};

/// Reverse Cuthill-McKee ordering; returns `perm` with `perm[new] = old`.
pub fn rcm_ordering(a: &SparseSymmetric) -> Vec<usize> {
    let n = a.n();
    let mut visited = vec![false; n];
    let mut order = Vec::with_capacity(n);
    while order.len() < n {
        let seed = (0..n).filter(|&i| !visited[i]).min_by_key(|&i| (a.degree(i), i)).unwrap();
        let root = pseudo_peripheral(a, seed, &visited);
        let start = order.len();
        visited[root] = true;
        order.push(root);
        let mut head = start;
        while head < order.len() {
            let v = order[head];
            head += 1;
            let mut next: Vec<usize> = a.neighbors(v).filter(|&w| !visited[w]).collect();
            next.sort_by_key(|&w| (a.degree(w), w));
            for w in next {
                visited[w] = true;
                order.push(w);
            }
        }
    }
    order.reverse();
    order
}

fn bfs_levels(a: &SparseSymmetric, root: usize, blocked: &[bool]) -> (usize, Vec<usize>) {
    let mut depth = vec![usize::MAX; a.n()];
    depth[root] = 0;
    let mut queue = VecDeque::from([root]);
    let mut last_level = vec![root];
    let mut max_depth = 0;
    while let Some(v) = queue.pop_front() {
        for w in a.neighbors(v) {
            if !blocked[w] && depth[w] == usize::MAX {
                depth[w] = depth[v] + 1;
                if depth[w] > max_depth {
                    max_depth = depth[w];
                    last_level.clear();
                }
                if depth[w] == max_depth {
                    last_level.push(w);
                }
                queue.push_back(w);
            }
        }
    }
    (max_depth, last_level)
}

fn pseudo_peripheral(a: &SparseSymmetric, seed: usize, blocked: &[bool]) -> usize {
    let mut root = seed;
    let (mut ecc, mut last) = bfs_levels(a, root, blocked);
    for _ in 0..8 {
        let cand = *last.iter().min_by_key(|&&w| (a.degree(w), w)).unwrap();
        let (e, l) = bfs_levels(a, cand, blocked);
        if e <= ecc {
            break;
        }
        root = cand;
        ecc = e;
        last = l;
    }
    root
}

/// Lower factor `L` with `P A P^T = L L^T`, stored row by row from the
/// first nonzero column of each row.
#[derive(Debug, Clone)]
pub struct ProfileCholesky {
    perm: Vec<usize>,
    first: Vec<usize>,
    start: Vec<usize>,
    data: Vec<f64>,
}

impl ProfileCholesky {
    pub fn factor(a: &SparseSymmetric) -> Result<Self> {
        let perm = rcm_ordering(a);
        Self::factor_with(a, perm)
    }

    pub fn factor_with(a: &SparseSymmetric, perm: Vec<usize>) -> Result<Self> {
        let n = a.n();
        let mut inv = vec![0; n];
        for (new, &old) in perm.iter().enumerate() {
            inv[old] = new;
        }
        let mut first: Vec<usize> = (0..n).collect();
        for (new, &old) in perm.iter().enumerate() {
            for (j, _) in a.row(old) {
                first[new] = first[new].min(inv[j]);
            }
        }
        let mut start = vec![0; n + 1];
        for i in 0..n {
            start[i + 1] = start[i] + (i - first[i] + 1);
        }
        let mut data = vec![0.0; start[n]];
        for (new, &old) in perm.iter().enumerate() {
            for (j, v) in a.row(old) {
                let jn = inv[j];
                if jn <= new {
                    data[start[new] + jn - first[new]] = v;
                }
            }
        }
        for i in 0..n {
            let fi = first[i];
            let (done, rest) = data.split_at_mut(start[i]);
            let row_i = &mut rest[..i - fi + 1];
            for j in fi..i {
                let fj = first[j];
                let row_j = &done[start[j]..start[j + 1]];
                let k0 = fi.max(fj);
                let dot: f64 = row_i[k0 - fi..j - fi].iter().zip(&row_j[k0 - fj..j - fj]).map(|(x, y)| x * y).sum();
                row_i[j - fi] = (row_i[j - fi] - dot) / row_j[j - fj];
            }
            let d = row_i[i - fi] - row_i[..i - fi].iter().map(|x| x * x).sum::<f64>();
            if !(d > 0.0) {
                return Err(Error::NotPositiveDefinite { row: perm[i], pivot: d });
            }
            row_i[i - fi] = d.sqrt();
        }
        Ok(ProfileCholesky { perm, first, start, data })
    }

    pub fn n(&self) -> usize {
        self.perm.len()
    }

    /// Number of stored factor entries.
    pub fn profile_size(&self) -> usize {
        self.data.len()
    }

    /// Solves `A x = b` in place.
    pub fn solve_in_place(&self, b: &mut [f64]) {
        let n = self.n();
        let mut y: Vec<f64> = self.perm.iter().map(|&old| b[old]).collect();
        for i in 0..n {
            let fi = self.first[i];
            let row = &self.data[self.start[i]..self.start[i + 1]];
            let s: f64 = row[..i - fi].iter().zip(&y[fi..i]).map(|(l, x)| l * x).sum();
            y[i] = (y[i] - s) / row[i - fi];
        }
        for i in (0..n).rev() {
            let fi = self.first[i];
            let row = &self.data[self.start[i]..self.start[i + 1]];
            y[i] /= row[i - fi];
            let yi = y[i];
            for (x, l) in y[fi..i].iter_mut().zip(&row[..i - fi]) {
                *x -= l * yi;
            }
        }
        for (new, &old) in self.perm.iter().enumerate() {
            b[old] = y[new];
        }
    }

    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let mut x = b.to_vec();
        self.solve_in_place(&mut x);
        x
    }
}
