use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::sparse::SparseSymmetric;
use crate::error::{Error, Result};

/// Beyond this size only eigenvalues come from the full decomposition;
/// eigenvectors are then recovered by shifted inverse iteration.
const FULL_DECOMPOSITION_LIMIT: usize = 400;

/// Relative spacing under which eigenvalues are treated as one cluster.
const CLUSTER_TOL: f64 = 1e-6;

/// Smallest `count` eigenpairs `(values, vectors)` of `K x = mu M x` with
/// M-orthonormal vectors, by reduction to `L^{-1} K L^{-T}`.
pub(crate) fn smallest_pairs(
    k: &SparseSymmetric,
    m: &SparseSymmetric,
    count: usize,
) -> Result<(Vec<f64>, Vec<Vec<f64>>)> {
    let n = k.n();
    let md = m.to_dense();
    let chol = md.clone().cholesky().ok_or_else(|| {
        let row = (0..n).find(|&i| md[(i, i)] <= 0.0).unwrap_or(0);
        Error::NotPositiveDefinite { row, pivot: md[(row, row)] }
    })?;
    let l = chol.l();
    let y = l.solve_lower_triangular(&k.to_dense()).expect("triangular factor is nonsingular");
    let mut c = l.solve_lower_triangular(&y.transpose()).expect("triangular factor is nonsingular");
    let ct = c.transpose();
    c += ct;
    c *= 0.5;

    let (values, z) = if n <= FULL_DECOMPOSITION_LIMIT {
        let eig = SymmetricEigen::new(c);
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
        let values: Vec<f64> = order[..count].iter().map(|&i| eig.eigenvalues[i]).collect();
        let z: Vec<DVector<f64>> = order[..count].iter().map(|&i| eig.eigenvectors.column(i).into_owned()).collect();
        (values, z)
    } else {
        let mut all: Vec<f64> = c.clone().symmetric_eigenvalues().iter().copied().collect();
        all.sort_by(f64::total_cmp);
        // Ritz values from the converged blocks are far more accurate than
        // the full-matrix values, whose error scales with the largest one
        cluster_vectors(&c, &all, count)?
    };
    let lt = l.transpose();
    let vectors: Vec<DVector<f64>> =
        z.into_iter().map(|zi| lt.solve_upper_triangular(&zi).expect("triangular factor is nonsingular")).collect();
    if n <= FULL_DECOMPOSITION_LIMIT {
        return Ok((values, vectors.into_iter().map(|x| x.iter().copied().collect()).collect()));
    }
    polish(&k.to_dense(), &md, &values, vectors)
}

/// Inverse iteration on the pencil itself, cluster by cluster, followed by
/// Rayleigh-Ritz. Forming `L^{-1} K L^{-T}` costs accuracy in proportion to
/// its largest eigenvalue, which is large when some masses are tiny.
fn polish(
    kd: &DMatrix<f64>,
    md: &DMatrix<f64>,
    values: &[f64],
    vectors: Vec<DVector<f64>>,
) -> Result<(Vec<f64>, Vec<Vec<f64>>)> {
    let scale = values.iter().fold(1.0f64, |a, v| a.max(v.abs()));
    let mut out_values = Vec::with_capacity(values.len());
    let mut out_vectors = Vec::with_capacity(values.len());
    let mut i = 0;
    while i < values.len() {
        let mut j = i + 1;
        while j < values.len() && values[j] - values[j - 1] <= CLUSTER_TOL * values[j].abs().max(1e-3 * scale) {
            j += 1;
        }
        let width = j - i;
        let mean = values[i..j].iter().sum::<f64>() / width as f64;
        let shift = mean - 1e-7 * mean.abs().max(1e-3 * scale);
        let lu = (kd - md * shift).lu();
        let mut block = DMatrix::from_columns(&vectors[i..j]);
        for _ in 0..2 {
            let rhs = md * &block;
            block = lu.solve(&rhs).ok_or(Error::NoConvergence { iterations: 0 })?;
            block = block.qr().q();
        }
        let kb = block.transpose() * kd * &block;
        let mb = block.transpose() * md * &block;
        let lb = mb.cholesky().ok_or(Error::NoConvergence { iterations: 0 })?.l();
        let y = lb.solve_lower_triangular(&kb).expect("triangular factor is nonsingular");
        let small = lb.solve_lower_triangular(&y.transpose()).expect("triangular factor is nonsingular");
        let eig = SymmetricEigen::new(0.5 * (&small + small.transpose()));
        let coeffs =
            lb.transpose().solve_upper_triangular(&eig.eigenvectors).expect("triangular factor is nonsingular");
        let mut order: Vec<usize> = (0..width).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
        for &o in &order {
            out_values.push(eig.eigenvalues[o]);
            out_vectors.push((&block * coeffs.column(o)).iter().copied().collect());
        }
        i = j;
    }
    Ok((out_values, out_vectors))
}

/// Eigenvectors for the smallest `count` eigenvalues of the symmetric `c`,
/// one block inverse iteration per cluster of close eigenvalues.
fn cluster_vectors(c: &DMatrix<f64>, sorted: &[f64], count: usize) -> Result<(Vec<f64>, Vec<DVector<f64>>)> {
    let n = c.nrows();
    let scale = sorted.iter().fold(1.0f64, |a, v| a.max(v.abs()));
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let mut values = Vec::new();
    let mut out: Vec<DVector<f64>> = Vec::new();
    let mut i = 0;
    while i < count {
        let mut j = i + 1;
        while j < n && sorted[j] - sorted[j - 1] <= CLUSTER_TOL * sorted[j].abs().max(1e-3 * scale) {
            j += 1;
        }
        let width = j - i;
        let mean = sorted[i..j].iter().sum::<f64>() / width as f64;
        let shift = mean - 1e-9 * mean.abs().max(1e-3 * scale);
        let mut shifted = c.clone();
        for d in 0..n {
            shifted[(d, d)] -= shift;
        }
        let lu = shifted.lu();
        let mut block = DMatrix::from_fn(n, width, |_, _| rng.gen_range(-1.0..1.0));
        for _ in 0..4 {
            for col in 0..width {
                let x = lu.solve(&block.column(col).into_owned()).ok_or(Error::NoConvergence { iterations: 0 })?;
                block.set_column(col, &x);
            }
            block = block.qr().q();
        }
        let small = block.transpose() * c * &block;
        let eig = SymmetricEigen::new(0.5 * (&small + small.transpose()));
        let mut order: Vec<usize> = (0..width).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
        for &o in &order {
            values.push(eig.eigenvalues[o]);
            out.push(&block * eig.eigenvectors.column(o));
        }
        i = j;
    }
    values.truncate(count);
    out.truncate(count);
    Ok((values, out))
}
