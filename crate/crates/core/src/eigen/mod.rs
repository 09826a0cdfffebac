//! Sparse symmetric generalized eigenproblems `K x = mu M x`.

mod cholesky;
mod dense;
mod lanczos;
mod sparse;

pub use cholesky::{rcm_ordering, ProfileCholesky};
pub use lanczos::{lanczos_shift_invert, LanczosOptions};
pub use sparse::SparseSymmetric;

use crate::error::{Error, Result};

/// Largest system handed to the dense path.
pub const DENSE_LIMIT: usize = 3000;

#[derive(Debug, Clone)]
pub struct EigenPairs {
    /// Ascending eigenvalues.
    pub values: Vec<f64>,
    /// M-orthonormal eigenvectors.
    pub vectors: Vec<Vec<f64>>,
    /// `||K x - mu M x||_{M^-1}` per pair.
    pub residuals: Vec<f64>,
}

impl EigenPairs {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Makes the entry of largest magnitude of every vector positive.
    pub fn normalize_signs(&mut self) {
        for x in &mut self.vectors {
            let big = x.iter().copied().fold(0.0f64, |a, v| if v.abs() > a.abs() { v } else { a });
            if big < 0.0 {
                x.iter_mut().for_each(|v| *v = -*v);
            }
        }
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// `||K x - mu M x||_{M^-1} / ||x||_M`.
pub fn generalized_residual(
    k: &SparseSymmetric,
    m: &SparseSymmetric,
    m_factor: &ProfileCholesky,
    mu: f64,
    x: &[f64],
) -> f64 {
    let kx = k.mul_vec(x);
    let mx = m.mul_vec(x);
    let r: Vec<f64> = kx.iter().zip(&mx).map(|(a, b)| a - mu * b).collect();
    let minv_r = m_factor.solve(&r);
    (dot(&r, &minv_r).max(0.0) / dot(x, &mx)).sqrt()
}

/// M-orthogonal projector onto the complement of a fixed subspace.
#[derive(Debug, Clone)]
pub struct Deflation {
    basis: Vec<Vec<f64>>,
    m_basis: Vec<Vec<f64>>,
}

impl Deflation {
    pub fn new(vectors: &[Vec<f64>], m: &SparseSymmetric) -> Self {
        let mut d = Deflation { basis: Vec::new(), m_basis: Vec::new() };
        for v in vectors {
            let mut x = v.clone();
            d.apply(&mut x);
            let mx = m.mul_vec(&x);
            let norm = dot(&x, &mx).sqrt();
            if norm > 0.0 {
                d.basis.push(x.iter().map(|a| a / norm).collect());
                d.m_basis.push(mx.iter().map(|a| a / norm).collect());
            }
        }
        d
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    /// M-normalized basis of the removed subspace.
    pub fn basis(&self) -> &[Vec<f64>] {
        &self.basis
    }

    /// `x <- x - B B^T M x`.
    pub fn apply(&self, x: &mut [f64]) {
        for (b, mb) in self.basis.iter().zip(&self.m_basis) {
            let c = dot(mb, x);
            for (xi, bi) in x.iter_mut().zip(b) {
                *xi -= c * bi;
            }
        }
    }
}

/// Projector removing the constant mode of a Neumann problem.
pub fn deflate_constants(m: &SparseSymmetric) -> Deflation {
    Deflation::new(&[vec![1.0; m.n()]], m)
}

/// `-0.1 tr(K) / tr(M)`: always keeps `K - sigma M` positive definite for
/// semidefinite `K`, but sits far below the low spectrum on fine meshes.
pub fn trace_shift(k: &SparseSymmetric, m: &SparseSymmetric) -> f64 {
    -0.1 * k.trace() / m.trace()
}

/// Shift a tenth of an estimated lowest eigenvalue below zero, from three
/// inverse-iteration steps at the trace shift.
pub fn estimate_shift(k: &SparseSymmetric, m: &SparseSymmetric, deflation: Option<&Deflation>) -> Result<f64> {
    let sigma0 = trace_shift(k, m);
    let factor = ProfileCholesky::factor(&k.combine(1.0, m, -sigma0)?)?;
    let n = k.n();
    // Smooth but non-constant start: a linear ramp in the index.
    let mut x: Vec<f64> = (0..n).map(|i| 1.0 + i as f64 / n as f64).collect();
    for _ in 0..3 {
        if let Some(d) = deflation {
            d.apply(&mut x);
        }
        x = factor.solve(&m.mul_vec(&x));
        let norm = m.bilinear(&x, &x).sqrt();
        if norm == 0.0 || !norm.is_finite() {
            return Ok(sigma0);
        }
        x.iter_mut().for_each(|v| *v /= norm);
    }
    if let Some(d) = deflation {
        d.apply(&mut x);
    }
    let rho = k.bilinear(&x, &x) / m.bilinear(&x, &x);
    let floor = 1e-8 * sigma0.abs();
    Ok(if rho.is_finite() && rho > 0.0 { -(0.1 * rho).max(floor) } else { sigma0 })
}

/// Smallest `count` eigenpairs through dense reduction (n ≤ 3000).
pub fn dense_generalized(k: &SparseSymmetric, m: &SparseSymmetric, count: usize) -> Result<EigenPairs> {
    let n = k.n();
    if m.n() != n {
        return Err(Error::InvalidInput("K and M differ in dimension".into()));
    }
    if count == 0 || count > n {
        return Err(Error::TooManyEigenpairs { requested: count, n });
    }
    if n > DENSE_LIMIT {
        return Err(Error::InvalidInput(format!("dense path limited to n <= {DENSE_LIMIT}, got {n}")));
    }
    let (values, vectors) = dense::smallest_pairs(k, m, count)?;
    let m_factor = ProfileCholesky::factor(m)?;
    let residuals = values.iter().zip(&vectors).map(|(&mu, x)| generalized_residual(k, m, &m_factor, mu, x)).collect();
    let mut out = EigenPairs { values, vectors, residuals };
    out.normalize_signs();
    Ok(out)
}
