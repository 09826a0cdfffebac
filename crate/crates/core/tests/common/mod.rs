//! Independent oracles shared by the integration tests.
#![allow(dead_code)]

/// k-th smallest (1-based) eigenvalue of the symmetric tridiagonal matrix
/// with diagonal `d` and off-diagonal `e`, by Sturm-count bisection.
pub fn tridiagonal_eigenvalue(d: &[f64], e: &[f64], k: usize) -> f64 {
    let n = d.len();
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for i in 0..n {
        let r = if i > 0 { e[i - 1].abs() } else { 0.0 } + if i + 1 < n { e[i].abs() } else { 0.0 };
        lo = lo.min(d[i] - r);
        hi = hi.max(d[i] + r);
    }
    let count_below = |x: f64| {
        let mut count = 0;
        let mut q = 1.0;
        for i in 0..n {
            let off = if i > 0 { e[i - 1] * e[i - 1] / q } else { 0.0 };
            q = d[i] - x - off;
            if q == 0.0 {
                q = -1e-300;
            }
            if q < 0.0 {
                count += 1;
            }
        }
        count
    };
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid == lo || mid == hi {
            break;
        }
        if count_below(mid) >= k {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Second-order finite-volume discretization of the radial cap problem with
/// `l >= 1` on `n` cells, returning the k-th eigenvalue.
pub fn radial_fd_eigenvalue(dim: usize, gamma: f64, l: usize, k: usize, n: usize) -> f64 {
    assert!(l >= 1);
    let dt = gamma / n as f64;
    let big_l = (l * (l + dim - 2)) as f64;
    let w = |t: f64| t.sin().powi(dim as i32 - 1);
    let mut a_diag = vec![0.0; n];
    let mut a_off = vec![0.0; n - 1];
    let mut b = vec![0.0; n];
    for j in 1..=n {
        let t = j as f64 * dt;
        let left = w(t - 0.5 * dt) / (dt * dt);
        let s2 = t.sin() * t.sin();
        if j < n {
            let right = w(t + 0.5 * dt) / (dt * dt);
            a_diag[j - 1] = left + right + big_l * w(t) / s2;
            a_off[j - 1] = -right;
            b[j - 1] = w(t);
        } else {
            a_diag[j - 1] = left + 0.5 * big_l * w(t) / s2;
            b[j - 1] = 0.5 * w(t);
        }
    }
    let d: Vec<f64> = a_diag.iter().zip(&b).map(|(a, b)| a / b).collect();
    let e: Vec<f64> = (0..n - 1).map(|i| a_off[i] / (b[i] * b[i + 1]).sqrt()).collect();
    tridiagonal_eigenvalue(&d, &e, k)
}

/// Richardson extrapolation of the finite-difference eigenvalue over the
/// grids `n / 2` and `n`.
pub fn radial_fd_richardson(dim: usize, gamma: f64, l: usize, k: usize, n: usize) -> f64 {
    let fine = radial_fd_eigenvalue(dim, gamma, l, k, n);
    let coarse = radial_fd_eigenvalue(dim, gamma, l, k, n / 2);
    (4.0 * fine - coarse) / 3.0
}
