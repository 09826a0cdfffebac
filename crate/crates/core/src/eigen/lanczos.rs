use nalgebra::{DMatrix, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::cholesky::ProfileCholesky;
use super::sparse::SparseSymmetric;
use super::{dot, generalized_residual, Deflation, EigenPairs};
use crate::error::{Error, Result};

#[derive(Debug, Clone)]
pub struct LanczosOptions {
    /// Vectors per Krylov block; must cover the largest multiplicity sought.
    pub block_size: usize,
    /// Block steps before giving up; `None` means `10 * count + 100`.
    pub max_iterations: Option<usize>,
    /// Bound on `||K x - mu M x||_{M^-1}` for M-normalized `x`. Backward
    /// stable solves cannot beat roughly `eps * lambda_max`, which on
    /// meridian meshes grows like `h^-4`.
    pub residual_tol: f64,
    /// Bound on the relative change of each Ritz value between iterations.
    pub ritz_tol: f64,
    pub seed: u64,
}

impl Default for LanczosOptions {
    fn default() -> Self {
        LanczosOptions { block_size: 3, max_iterations: None, residual_tol: 1e-8, ritz_tol: 1e-12, seed: 20 }
    }
}

struct Basis<'a> {
    m: &'a SparseSymmetric,
    deflation: Option<&'a Deflation>,
    v: Vec<Vec<f64>>,
    mv: Vec<Vec<f64>>,
}

impl Basis<'_> {
    /// M-orthonormalizes `x` against the deflated space and the basis
    /// (two Gram-Schmidt sweeps); returns false if nothing is left.
    fn push(&mut self, mut x: Vec<f64>) -> bool {
        let before = self.m.bilinear(&x, &x).sqrt();
        if before == 0.0 {
            return false;
        }
        for _ in 0..2 {
            if let Some(d) = self.deflation {
                d.apply(&mut x);
            }
            for (v, mv) in self.v.iter().zip(&self.mv) {
                let c = dot(mv, &x);
                for (xi, vi) in x.iter_mut().zip(v) {
                    *xi -= c * vi;
                }
            }
        }
        let mx = self.m.mul_vec(&x);
        let norm = dot(&mx, &x).max(0.0).sqrt();
        if norm <= 1e-10 * before {
            return false;
        }
        self.v.push(x.iter().map(|xi| xi / norm).collect());
        self.mv.push(mx.iter().map(|xi| xi / norm).collect());
        true
    }
}

/// Block Lanczos on `(K - sigma M)^{-1} M` in the M-inner product with full
/// reorthogonalization and explicit Rayleigh-Ritz. Returns the `count`
/// eigenpairs nearest `sigma` in ascending order.
pub fn lanczos_shift_invert(
    k: &SparseSymmetric,
    m: &SparseSymmetric,
    sigma: f64,
    count: usize,
    deflation: Option<&Deflation>,
    opts: &LanczosOptions,
) -> Result<EigenPairs> {
    let n = k.n();
    let available = n - deflation.map_or(0, |d| d.dim());
    if count == 0 || count > available {
        return Err(Error::TooManyEigenpairs { requested: count, n: available });
    }
    let op = ProfileCholesky::factor(&k.combine(1.0, m, -sigma)?)?;
    let m_factor = ProfileCholesky::factor(m)?;
    let max_iterations = opts.max_iterations.unwrap_or(10 * count + 100);
    let block_size = opts.block_size.max(1).min(available);
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut random = |n: usize| -> Vec<f64> { (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect() };

    let mut basis = Basis { m, deflation, v: Vec::new(), mv: Vec::new() };
    // All-ones start vector, unless it lies in the deflated space.
    if !basis.push(vec![1.0; n]) {
        basis.push(random(n));
    }
    while basis.v.len() < block_size {
        if !basis.push(random(n)) {
            break;
        }
    }
    let mut images: Vec<Vec<f64>> = Vec::new();
    let mut t = DMatrix::<f64>::zeros(0, 0);
    let mut previous: Vec<f64> = Vec::new();
    for iteration in 0..max_iterations {
        let block_start = images.len();
        for j in block_start..basis.v.len() {
            let mut y = op.solve(&basis.mv[j]);
            if let Some(d) = deflation {
                d.apply(&mut y);
            }
            images.push(y);
        }
        let size = images.len();
        let mut grown = DMatrix::<f64>::zeros(size, size);
        grown.view_mut((0, 0), (t.nrows(), t.ncols())).copy_from(&t);
        for j in block_start..size {
            for i in 0..=j {
                let value = dot(&basis.mv[i], &images[j]);
                grown[(i, j)] = value;
                grown[(j, i)] = value;
            }
        }
        t = grown;

        let eig = SymmetricEigen::new(t.clone());
        let mut order: Vec<usize> = (0..size).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[b].abs().total_cmp(&eig.eigenvalues[a].abs()));
        let wanted = count.min(size);
        let theta: Vec<f64> = order[..wanted].iter().map(|&i| eig.eigenvalues[i]).collect();
        let exhausted = size >= available;
        let stable = wanted == count
            && previous.len() == count
            && theta.iter().zip(&previous).all(|(a, b)| (a - b).abs() <= opts.ritz_tol * a.abs());
        if stable || exhausted {
            // Guard vectors keep near-degenerate neighbours inside the
            // polishing block.
            let guarded = (count + block_size).min(size);
            let ritz: Vec<(f64, Vec<f64>)> = order[..guarded]
                .iter()
                .map(|&i| {
                    let s = eig.eigenvectors.column(i);
                    let mut x = vec![0.0; n];
                    for (c, v) in s.iter().zip(&basis.v) {
                        for (xi, vi) in x.iter_mut().zip(v) {
                            *xi += c * vi;
                        }
                    }
                    (sigma + 1.0 / eig.eigenvalues[i], x)
                })
                .collect();
            let mut pairs = polish(k, m, &op, deflation, ritz);
            pairs.truncate(wanted);
            let residuals: Vec<f64> =
                pairs.iter().map(|(mu, x)| generalized_residual(k, m, &m_factor, *mu, x)).collect();
            if residuals.iter().all(|&r| r <= opts.residual_tol) {
                let mut out = EigenPairs {
                    values: pairs.iter().map(|p| p.0).collect(),
                    vectors: pairs.into_iter().map(|p| p.1).collect(),
                    residuals,
                };
                out.normalize_signs();
                return Ok(out);
            }
            if exhausted {
                return Err(Error::NoConvergence { iterations: iteration + 1 });
            }
        }
        previous = theta;

        let mut added = 0;
        for j in block_start..size {
            if basis.push(images[j].clone()) {
                added += 1;
            }
        }
        while added < block_size && basis.v.len() < available {
            if basis.push(random(n)) {
                added += 1;
            }
        }
        if added == 0 {
            return Err(Error::NoConvergence { iterations: iteration + 1 });
        }
    }
    Err(Error::NoConvergence { iterations: max_iterations })
}

/// Two block inverse-iteration sweeps with Rayleigh-Ritz on the converged
/// Ritz vectors. This strips the high-frequency roundoff picked up by a
/// long M-orthogonalized basis when M is badly scaled.
fn polish(
    k: &SparseSymmetric,
    m: &SparseSymmetric,
    op: &ProfileCholesky,
    deflation: Option<&Deflation>,
    pairs: Vec<(f64, Vec<f64>)>,
) -> Vec<(f64, Vec<f64>)> {
    let mut block: Vec<Vec<f64>> = pairs.iter().map(|p| p.1.clone()).collect();
    for _ in 0..2 {
        let mut next = Basis { m, deflation, v: Vec::new(), mv: Vec::new() };
        for x in &block {
            let mut y = op.solve(&m.mul_vec(x));
            if let Some(d) = deflation {
                d.apply(&mut y);
            }
            if !next.push(y) {
                return pairs;
            }
        }
        block = next.v;
    }
    let q = block.len();
    let kv: Vec<Vec<f64>> = block.iter().map(|v| k.mul_vec(v)).collect();
    let t = DMatrix::from_fn(q, q, |i, j| 0.5 * (dot(&block[i], &kv[j]) + dot(&block[j], &kv[i])));
    let eig = SymmetricEigen::new(t);
    let mut out: Vec<(f64, Vec<f64>)> = (0..q)
        .map(|c| {
            let mut x = vec![0.0; k.n()];
            for (s, v) in eig.eigenvectors.column(c).iter().zip(&block) {
                for (xi, vi) in x.iter_mut().zip(v) {
                    *xi += s * vi;
                }
            }
            (eig.eigenvalues[c], x)
        })
        .collect();
    out.sort_by(|a, b| a.0.total_cmp(&b.0));
    out
}
