//! Rotations of `S^N` that carry a chosen pole to the North Pole, and the
//! balancing search that makes the test functions orthogonal to constants.

use nalgebra::{DMatrix, Matrix2, Vector2};

use super::region::{QuadNode, Region};
use crate::cap_spectrum::ExtendedProfile;
use crate::error::{Error, Result};
use crate::mesh::DomainSpec;
use crate::stereographic::chart_to_sphere;

/// Balancing succeeds below this multiple of `G(gamma) |Omega|`.
pub const BALANCE_TOL: f64 = 1e-8;
const FD_STEP: f64 = 1e-6;
const NEWTON_STEPS: usize = 40;
const FALLBACK_GRID: usize = 32;

/// Orientation of the sphere, stored as the chart position of the pole `P`
/// and a spin `beta` of the tangent frame at `P` (S² only).
///
/// In the rotated frame `P` is the North Pole: the minimal rotation in the
/// plane of `P` and the North Pole, followed by the spin.
#[derive(Debug, Clone, PartialEq)]
pub struct Rotation {
    pub dim: usize,
    /// Stereographic coordinates of the pole (length `N`).
    pub pole_chart: Vec<f64>,
    pub beta: f64,
    /// Tangent vectors `e_1..e_N` followed by `P`, in original coordinates.
    frame: Vec<Vec<f64>>,
}

impl Rotation {
    pub fn identity(dim: usize) -> Self {
        Self::from_pole(dim, vec![0.0; dim], 0.0)
    }

    pub fn from_pole(dim: usize, pole_chart: Vec<f64>, beta: f64) -> Self {
        assert_eq!(pole_chart.len(), dim);
        let p = chart_to_sphere(&pole_chart);
        let n = dim;
        let c = p[n];
        // R = I + W + W^2 / (1 + c) with W = p e_N^T - e_N p^T
        let w = |v: &[f64]| -> Vec<f64> {
            let mut out: Vec<f64> = p.iter().map(|pi| pi * v[n]).collect();
            let pv: f64 = p.iter().zip(v).map(|(a, b)| a * b).sum();
            out[n] -= pv;
            out
        };
        let mut frame: Vec<Vec<f64>> = (0..=n)
            .map(|k| {
                let mut e = vec![0.0; n + 1];
                e[k] = 1.0;
                let w1 = w(&e);
                let w2 = w(&w1);
                (0..=n).map(|d| e[d] + w1[d] + w2[d] / (1.0 + c)).collect()
            })
            .collect();
        if n >= 2 && beta != 0.0 {
            let (sb, cb) = beta.sin_cos();
            let (e1, e2) = (frame[0].clone(), frame[1].clone());
            frame[0] = e1.iter().zip(&e2).map(|(a, b)| cb * a + sb * b).collect();
            frame[1] = e1.iter().zip(&e2).map(|(a, b)| -sb * a + cb * b).collect();
        }
        Rotation { dim, pole_chart, beta, frame }
    }

    pub fn from_chart_pole(q: [f64; 2], beta: f64) -> Self {
        Self::from_pole(2, q.to_vec(), beta)
    }

    /// S³ rotation by `tau` in the plane of the symmetry axis and the pole.
    pub fn about_axis(tau: f64) -> Self {
        Self::from_pole(3, vec![(tau / 2.0).tan(), 0.0, 0.0], 0.0)
    }

    /// The same pole with a different spin.
    pub fn with_beta(&self, beta: f64) -> Self {
        Self::from_pole(self.dim, self.pole_chart.clone(), beta)
    }

    /// Rotation angle of an axis-preserving S³ rotation.
    pub fn axis_angle(&self) -> Option<f64> {
        (self.dim == 3 && self.pole_chart[1] == 0.0 && self.pole_chart[2] == 0.0)
            .then(|| 2.0 * self.pole_chart[0].atan())
    }

    /// Geodesic distance of the pole from the North Pole, and its azimuth.
    pub fn pole_angles(&self) -> (f64, f64) {
        let s = self.pole_chart.iter().map(|v| v * v).sum::<f64>().sqrt();
        (2.0 * s.atan(), self.pole_chart[1].atan2(self.pole_chart[0]))
    }

    pub fn pole(&self) -> &[f64] {
        &self.frame[self.dim]
    }

    pub(crate) fn frame(&self) -> &[Vec<f64>] {
        &self.frame
    }

    /// Coordinates of `y` in the rotated frame.
    pub fn apply(&self, y: &[f64]) -> Vec<f64> {
        self.frame.iter().map(|e| e.iter().zip(y).map(|(a, b)| a * b).sum()).collect()
    }

    pub fn matrix(&self) -> DMatrix<f64> {
        let n = self.dim + 1;
        DMatrix::from_fn(n, n, |i, j| self.frame[i][j])
    }

    /// `max |R R^T - I|` and `det R`; an orientation-preserving isometry has
    /// `(0, 1)`.
    pub fn isometry_defect(&self) -> (f64, f64) {
        let r = self.matrix();
        let n = self.dim + 1;
        let defect = (&r * r.transpose() - DMatrix::<f64>::identity(n, n)).abs().max();
        (defect, r.determinant())
    }
}

/// Outcome of the balancing search.
#[derive(Debug, Clone)]
pub struct Balancing {
    pub rotation: Rotation,
    /// `|(int Phi_1, ..., int Phi_N)|` at the returned rotation.
    pub residual: f64,
    /// `G(gamma) |Omega|`.
    pub scale: f64,
    pub newton_steps: usize,
    pub used_grid: bool,
}

impl Balancing {
    pub fn converged(&self) -> bool {
        self.residual < BALANCE_TOL * self.scale
    }
}

/// `int_Omega Phi_i` for the pole of `rot`, with the quadrature nodes.
pub(crate) fn moment(region: &Region, profile: &ExtendedProfile, rot: &Rotation) -> Result<(Vec<f64>, Vec<QuadNode>)> {
    let nodes = region.nodes(rot, Some(profile.gamma))?;
    let dim = rot.dim;
    let mut m = vec![0.0; dim];
    for nd in &nodes {
        let s = nd.theta_p.sin();
        if s <= 0.0 {
            continue;
        }
        let g = profile.value(nd.theta_p) / s;
        for (i, mi) in m.iter_mut().enumerate() {
            *mi += nd.w * g * nd.yr[i];
        }
    }
    Ok((m, nodes))
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Finds the pole position that makes `int_Omega Phi_i` vanish: damped
/// Newton with finite-difference Jacobian on S² (grid restart on stall), and
/// a 1-D search along the symmetry axis on S³.
pub fn find_balancing_rotation(spec: &DomainSpec, profile: &ExtendedProfile) -> Result<Balancing> {
    let region = Region::new(spec)?;
    if profile.dim() != spec.dim() {
        return Err(Error::InvalidInput("profile dimension differs from the domain".into()));
    }
    match spec.dim() {
        2 => balance_s2(&region, profile),
        _ => balance_s3(&region, profile),
    }
}

fn volume_scale(nodes: &[QuadNode], profile: &ExtendedProfile) -> f64 {
    profile.value(profile.gamma) * nodes.iter().map(|n| n.w).sum::<f64>()
}

fn balance_s2(region: &Region, profile: &ExtendedProfile) -> Result<Balancing> {
    let eval = |q: [f64; 2]| -> Option<Vector2<f64>> {
        let (m, _) = moment(region, profile, &Rotation::from_chart_pole(q, 0.0)).ok()?;
        Some(Vector2::new(m[0], m[1]))
    };
    let (start, scale) = spherical_centroid(region, profile)?;
    let target = BALANCE_TOL * scale;
    let (mut q, mut f, mut steps) = newton_2d(&eval, start, target);
    let mut used_grid = false;
    if f.norm() >= target {
        used_grid = true;
        if let Some(g) = grid_start(region, &eval) {
            let (q2, f2, s2) = newton_2d(&eval, g, target);
            steps += s2;
            if f2.norm() < f.norm() {
                (q, f) = (q2, f2);
            }
        }
    }
    let balancing = Balancing {
        rotation: Rotation::from_chart_pole(q, 0.0),
        residual: f.norm(),
        scale,
        newton_steps: steps,
        used_grid,
    };
    if balancing.converged() {
        Ok(balancing)
    } else {
        Err(Error::BalancingStagnated { residual: balancing.residual })
    }
}

/// Chart point of the normalized first moment of the domain, and the scale.
fn spherical_centroid(region: &Region, profile: &ExtendedProfile) -> Result<([f64; 2], f64)> {
    let inner = deepest_point(region).ok_or_else(|| Error::Quadrature("no interior point found".into()))?;
    let nodes = region.nodes(&Rotation::from_chart_pole(inner, 0.0), None)?;
    let mut c = [0.0; 3];
    for n in &nodes {
        for d in 0..3 {
            c[d] += n.w * n.y[d];
        }
    }
    let len = norm(&c);
    let q = [c[0] / (len + c[2]), c[1] / (len + c[2])];
    let q = if region.contains(q) { q } else { inner };
    Ok((q, volume_scale(&nodes, profile)))
}

fn deepest_point(region: &Region) -> Option<[f64; 2]> {
    let n = 64;
    let mut best: Option<([f64; 2], f64)> = None;
    for i in 0..=n {
        for j in 0..=n {
            let x = [-1.0 + 2.0 * i as f64 / n as f64, -1.0 + 2.0 * j as f64 / n as f64];
            if !region.contains(x) {
                continue;
            }
            // distance to the nearest outside grid neighbour ring
            let depth = (1..=n)
                .find(|&r| {
                    let d = 2.0 * r as f64 / n as f64;
                    [[d, 0.0], [-d, 0.0], [0.0, d], [0.0, -d]]
                        .iter()
                        .any(|o| !region.contains([x[0] + o[0], x[1] + o[1]]))
                })
                .unwrap_or(n) as f64;
            if best.is_none_or(|b| depth > b.1) {
                best = Some((x, depth));
            }
        }
    }
    best.map(|b| b.0)
}

fn newton_2d(
    eval: &impl Fn([f64; 2]) -> Option<Vector2<f64>>,
    start: [f64; 2],
    target: f64,
) -> ([f64; 2], Vector2<f64>, usize) {
    let mut q = start;
    let Some(mut f) = eval(q) else { return (q, Vector2::repeat(f64::INFINITY), 0) };
    let mut steps = 0;
    while steps < NEWTON_STEPS && f.norm() >= 1e-3 * target {
        steps += 1;
        let mut jac = Matrix2::zeros();
        for d in 0..2 {
            let mut qp = q;
            let mut qm = q;
            qp[d] += FD_STEP;
            qm[d] -= FD_STEP;
            let (Some(fp), Some(fm)) = (eval(qp), eval(qm)) else { return (q, f, steps) };
            jac.set_column(d, &((fp - fm) / (2.0 * FD_STEP)));
        }
        let Some(dq) = jac.lu().solve(&(-f)) else { break };
        let mut lambda = 1.0;
        let mut accepted = false;
        for _ in 0..30 {
            let trial = [q[0] + lambda * dq[0], q[1] + lambda * dq[1]];
            if let Some(ft) = eval(trial) {
                if ft.norm() < f.norm() {
                    q = trial;
                    f = ft;
                    accepted = true;
                    break;
                }
            }
            lambda *= 0.5;
        }
        if !accepted {
            break;
        }
    }
    (q, f, steps)
}

fn grid_start(region: &Region, eval: &impl Fn([f64; 2]) -> Option<Vector2<f64>>) -> Option<[f64; 2]> {
    let mut best: Option<([f64; 2], f64)> = None;
    let n = FALLBACK_GRID;
    for i in 0..n {
        for j in 0..n {
            let q = [-1.0 + (2 * i + 1) as f64 / n as f64, -1.0 + (2 * j + 1) as f64 / n as f64];
            if !region.contains(q) {
                continue;
            }
            if let Some(f) = eval(q) {
                if best.is_none_or(|b| f.norm() < b.1) {
                    best = Some((q, f.norm()));
                }
            }
        }
    }
    best.map(|b| b.0)
}

fn balance_s3(region: &Region, profile: &ExtendedProfile) -> Result<Balancing> {
    let eval = |tau: f64| -> Option<(f64, f64)> {
        let (m, _) = moment(region, profile, &Rotation::about_axis(tau)).ok()?;
        Some((m[0], norm(&m)))
    };
    let nodes = region.nodes(&Rotation::identity(3), None)?;
    let scale = volume_scale(&nodes, profile);
    let target = BALANCE_TOL * scale;
    let mut tau = 0.0;
    let (mut f, mut full) = eval(tau).ok_or_else(|| Error::Quadrature("moment evaluation failed".into()))?;
    let mut steps = 0;
    while steps < NEWTON_STEPS && full >= 1e-3 * target {
        steps += 1;
        let (Some((fp, _)), Some((fm, _))) = (eval(tau + FD_STEP), eval(tau - FD_STEP)) else { break };
        let slope = (fp - fm) / (2.0 * FD_STEP);
        if slope == 0.0 {
            break;
        }
        let step = -f / slope;
        let mut lambda = 1.0;
        let mut accepted = false;
        for _ in 0..30 {
            if let Some((ft, nt)) = eval(tau + lambda * step) {
                if nt < full {
                    tau += lambda * step;
                    (f, full) = (ft, nt);
                    accepted = true;
                    break;
                }
            }
            lambda *= 0.5;
        }
        if !accepted {
            break;
        }
    }
    let balancing =
        Balancing { rotation: Rotation::about_axis(tau), residual: full, scale, newton_steps: steps, used_grid: false };
    if balancing.converged() {
        Ok(balancing)
    } else {
        Err(Error::BalancingStagnated { residual: balancing.residual })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cap_spectrum::cap_profile;
    use std::f64::consts::PI;

    #[test]
    fn frames_are_rotations() {
        for (dim, q, beta) in [(2, vec![0.3, -0.2], 0.7), (3, vec![0.2, 0.0, 0.0], 0.0), (2, vec![0.0, 0.0], 0.0)] {
            let r = Rotation::from_pole(dim, q.clone(), beta);
            let (defect, det) = r.isometry_defect();
            assert!(defect < 1e-14 && (det - 1.0).abs() < 1e-14, "{defect} {det}");
            let p = chart_to_sphere(&q);
            let rp = r.apply(&p);
            assert!((rp[dim] - 1.0).abs() < 1e-14);
        }
        assert!((Rotation::about_axis(0.4).axis_angle().unwrap() - 0.4).abs() < 1e-15);
    }

    #[test]
    fn centered_cap_balances_at_identity() {
        let g = cap_profile(2, PI / 3.0).unwrap();
        let b = find_balancing_rotation(&DomainSpec::Cap { dim: 2, gamma: PI / 3.0 }, &g).unwrap();
        assert!(b.residual < 1e-14 * b.scale);
        assert!(b.rotation.pole_angles().0 < 1e-12);
    }

    #[test]
    fn shifted_cap_balances_at_its_center() {
        // geodesic cap of radius pi/4 centred at angle 0.4 along the first axis
        let (t0, r) = (0.4f64, PI / 4.0);
        let a = ((t0 - r) / 2.0).tan();
        let b = ((t0 + r) / 2.0).tan();
        let spec = DomainSpec::DiskRegion { center: [0.5 * (a + b), 0.0], radius: 0.5 * (b - a) };
        let g = cap_profile(2, r).unwrap();
        let bal = find_balancing_rotation(&spec, &g).unwrap();
        let (theta, _) = bal.rotation.pole_angles();
        assert!((theta - t0).abs() < 1e-8, "{theta}");
        assert!(bal.converged());
    }
}
