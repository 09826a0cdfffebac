//! Quadrature over the exact domain (not the mesh): geodesic polar
//! coordinates about the rotation pole on S², meridian coordinates times a
//! trapezoidal azimuth on S³. Both rules split at the kink `theta_P = gamma`
//! of the extended profile and at boundary corners.

use std::f64::consts::PI;

use super::rotation::Rotation;
use crate::error::{Error, Result};
use crate::mesh::{point_in_polygon, segment_distance, signed_area, DomainSpec};
use crate::quadrature::GaussRule;
use crate::stereographic::sphere_to_chart;

const MARCH_STEP: f64 = 0.02;
const BISECTIONS: usize = 60;
const KINK_SAMPLES: usize = 720;
/// Widest angular panel.
const MAX_PANEL: f64 = 2.0 * PI / 64.0;
const ANGULAR_NODES: usize = 16;
const INNER_NODES: usize = 24;
const OUTER_NODES: usize = 16;
const MERIDIAN_PANELS: usize = 48;
const MERIDIAN_PHI_NODES: usize = 10;
const MERIDIAN_THETA_NODES: usize = 20;
/// Azimuthal trapezoid nodes on S³; exact for the low Fourier modes involved.
pub const PSI_NODES: usize = 8;

/// One quadrature node on `S^N`.
#[derive(Debug, Clone, Copy)]
pub struct QuadNode {
    /// Point in the original frame, padded with zeros beyond `N + 1`.
    pub y: [f64; 4],
    /// Coordinates in the rotated frame; index `N` is `cos theta_P`.
    pub yr: [f64; 4],
    /// Geodesic distance to the pole.
    pub theta_p: f64,
    pub w: f64,
    /// Chart point (S²) or `(theta, phi)` (S³).
    pub chart: [f64; 2],
    pub psi: f64,
}

#[derive(Debug, Clone)]
pub(crate) enum ChartLevel {
    Circle { center: [f64; 2], radius: f64 },
    Radial { base: f64, amplitudes: Vec<(u32, f64)> },
    Polygon(Vec<[f64; 2]>),
}

impl ChartLevel {
    /// Negative inside, positive outside.
    fn eval(&self, x: [f64; 2]) -> f64 {
        match self {
            ChartLevel::Circle { center, radius } => (x[0] - center[0]).hypot(x[1] - center[1]) - radius,
            ChartLevel::Radial { base, amplitudes } => {
                let phi = x[1].atan2(x[0]);
                let r = base * (1.0 + amplitudes.iter().map(|&(j, e)| e * (j as f64 * phi).cos()).sum::<f64>());
                x[0].hypot(x[1]) - r
            }
            ChartLevel::Polygon(v) => {
                let n = v.len();
                let d = (0..n).map(|i| segment_distance(x, v[i], v[(i + 1) % n])).fold(f64::INFINITY, f64::min);
                if point_in_polygon(x, v) {
                    -d
                } else {
                    d
                }
            }
        }
    }
}

/// Exact description of a domain for quadrature.
#[derive(Debug, Clone)]
pub(crate) enum Region {
    Chart {
        level: ChartLevel,
        corners: Vec<[f64; 2]>,
    },
    /// `theta <= f(phi)` with `f` piecewise linear through the polygon.
    Meridian {
        polygon: Vec<[f64; 2]>,
        breaks: Vec<f64>,
    },
}

impl Region {
    pub fn new(spec: &DomainSpec) -> Result<Self> {
        spec.validate()?;
        let chart = |level| Ok(Region::Chart { level, corners: Vec::new() });
        match spec {
            DomainSpec::Cap { dim: 2, gamma } => {
                chart(ChartLevel::Circle { center: [0.0, 0.0], radius: (gamma / 2.0).tan() })
            }
            DomainSpec::Cap { gamma, .. } => meridian(vec![[0.0, 0.0], [*gamma, 0.0], [*gamma, PI], [0.0, PI]]),
            DomainSpec::DiskRegion { center, radius } => chart(ChartLevel::Circle { center: *center, radius: *radius }),
            DomainSpec::PerturbedCap { gamma, amplitudes } => {
                chart(ChartLevel::Radial { base: (gamma / 2.0).tan(), amplitudes: amplitudes.clone() })
            }
            DomainSpec::PolygonRegion { vertices } => {
                let mut v = vertices.clone();
                if signed_area(&v) < 0.0 {
                    v.reverse();
                }
                Ok(Region::Chart { level: ChartLevel::Polygon(v.clone()), corners: v })
            }
            DomainSpec::MeridianRegion { vertices } => meridian(vertices.clone()),
        }
    }

    /// Whether a chart point (S²) or `(theta, phi)` (S³) lies inside.
    pub fn contains(&self, x: [f64; 2]) -> bool {
        match self {
            Region::Chart { level, .. } => level.eval(x) < 0.0,
            Region::Meridian { .. } => x[0] < self.theta_bound(x[1]),
        }
    }

    /// Meridian boundary `theta = f(phi)`.
    fn theta_bound(&self, phi: f64) -> f64 {
        let Region::Meridian { polygon, .. } = self else { return f64::NAN };
        let n = polygon.len();
        let mut best = f64::NEG_INFINITY;
        for i in 0..n {
            let (a, b) = (polygon[i], polygon[(i + 1) % n]);
            if (phi - a[1]) * (phi - b[1]) <= 0.0 && a[1] != b[1] {
                best = best.max(a[0] + (phi - a[1]) / (b[1] - a[1]) * (b[0] - a[0]));
            }
        }
        best
    }

    /// Quadrature nodes with rotated coordinates relative to `rot`; split at
    /// `theta_P = gamma` when given.
    pub fn nodes(&self, rot: &Rotation, gamma: Option<f64>) -> Result<Vec<QuadNode>> {
        match self {
            Region::Chart { level, corners } => chart_nodes(level, corners, rot, gamma),
            Region::Meridian { breaks, .. } => self.meridian_nodes(breaks, rot, gamma),
        }
    }

    fn meridian_nodes(&self, breaks: &[f64], rot: &Rotation, gamma: Option<f64>) -> Result<Vec<QuadNode>> {
        let tau = rot.axis_angle().ok_or_else(|| {
            Error::InvalidInput("S³ quadrature needs a rotation that preserves the symmetry axis".into())
        })?;
        // On a meridian ray, cos theta_P = A cos(theta - delta).
        let kink = |phi: f64| -> Option<(f64, f64, f64)> {
            let gamma = gamma?;
            let (a1, a2) = (tau.cos(), tau.sin() * phi.cos());
            let amp = a1.hypot(a2);
            let c = gamma.cos() / amp;
            (c < 1.0).then(|| {
                let delta = a2.atan2(a1);
                (delta, c.acos(), amp)
            })
        };
        let kink_points = |phi: f64| -> Vec<f64> { kink(phi).map(|(d, w, _)| vec![d - w, d + w]).unwrap_or_default() };
        let mut cuts: Vec<f64> = breaks.to_vec();
        if gamma.is_some() {
            // phi where a kink point meets the boundary
            let f = |phi: f64, k: usize| -> f64 {
                let b = self.theta_bound(phi);
                kink_points(phi).get(k).map_or(f64::NAN, |t| t - b)
            };
            for k in 0..2 {
                cuts.extend(sign_changes(0.0, PI, KINK_SAMPLES, |p| f(p, k)));
            }
        }
        let panels = panelize(0.0, PI, cuts, PI / MERIDIAN_PANELS as f64);
        let phi_rule = GaussRule::new(MERIDIAN_PHI_NODES);
        let theta_rule = GaussRule::new(MERIDIAN_THETA_NODES);
        let frame = rot.frame();
        let dpsi = 2.0 * PI / PSI_NODES as f64;
        let mut out = Vec::new();
        for w in panels.windows(2) {
            for (phi, wphi) in phi_rule.on(w[0], w[1]) {
                let tb = self.theta_bound(phi);
                let mut seg = vec![0.0];
                seg.extend(kink_points(phi).into_iter().filter(|t| *t > 0.0 && *t < tb));
                seg.push(tb);
                seg.sort_by(f64::total_cmp);
                for s in seg.windows(2) {
                    for (theta, wt) in theta_rule.on(s[0], s[1]) {
                        let (st, ct) = theta.sin_cos();
                        let (sp, cp) = phi.sin_cos();
                        let base = wphi * wt * st * st * sp * dpsi;
                        for k in 0..PSI_NODES {
                            let psi = k as f64 * dpsi;
                            let y = [st * cp, st * sp * psi.cos(), st * sp * psi.sin(), ct];
                            out.push(make_node(y, 3, frame, base, [theta, phi], psi));
                        }
                    }
                }
            }
        }
        Ok(out)
    }
}

fn meridian(mut polygon: Vec<[f64; 2]>) -> Result<Region> {
    if signed_area(&polygon) < 0.0 {
        polygon.reverse();
    }
    let region = Region::Meridian { polygon: polygon.clone(), breaks: Vec::new() };
    let (lo, hi) = polygon.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), p| (l.min(p[1]), h.max(p[1])));
    let rule = GaussRule::new(8);
    let mut breaks: Vec<f64> = polygon.iter().map(|p| p[1]).filter(|&p| p > 0.0 && p < PI).collect();
    breaks.sort_by(f64::total_cmp);
    breaks.dedup();
    let mut knots = vec![0.0];
    knots.extend(&breaks);
    knots.push(PI);
    let under: f64 = knots.windows(2).map(|w| rule.integrate(w[0], w[1], |p| region.theta_bound(p))).sum();
    let area = signed_area(&polygon);
    if lo.abs() > 1e-12 || (hi - PI).abs() > 1e-12 || (under - area).abs() > 1e-9 * area {
        return Err(Error::InvalidInput(
            "exact quadrature needs meridian regions of the form 0 <= theta <= f(phi), 0 <= phi <= pi".into(),
        ));
    }
    Ok(Region::Meridian { polygon, breaks })
}

fn make_node(y: [f64; 4], dim: usize, frame: &[Vec<f64>], w: f64, chart: [f64; 2], psi: f64) -> QuadNode {
    let mut yr = [0.0; 4];
    for (k, e) in frame.iter().enumerate() {
        yr[k] = (0..=dim).map(|d| e[d] * y[d]).sum();
    }
    let tangential = (0..dim).map(|k| yr[k] * yr[k]).sum::<f64>().sqrt();
    QuadNode { y, yr, theta_p: tangential.atan2(yr[dim]), w, chart, psi }
}

fn chart_nodes(level: &ChartLevel, corners: &[[f64; 2]], rot: &Rotation, gamma: Option<f64>) -> Result<Vec<QuadNode>> {
    let frame = rot.frame();
    let pole = &frame[2];
    let chart_of = |y: &[f64]| -> [f64; 2] {
        let c = sphere_to_chart(y);
        [c[0], c[1]]
    };
    if level.eval(chart_of(pole)) >= 0.0 {
        return Err(Error::Quadrature("rotation pole lies outside the domain".into()));
    }
    let point = |t: f64, a: f64| -> [f64; 3] {
        let (st, ct) = t.sin_cos();
        let (sa, ca) = a.sin_cos();
        [0, 1, 2].map(|d| ct * pole[d] + st * (ca * frame[0][d] + sa * frame[1][d]))
    };
    let inside = |t: f64, a: f64| level.eval(chart_of(&point(t, a))) < 0.0;
    // First exit distance along the geodesic ray of direction `a`.
    let exit = |a: f64| -> Result<f64> {
        let mut t = 0.0;
        while inside(t + MARCH_STEP, a) {
            t += MARCH_STEP;
            if t > PI - 0.1 {
                return Err(Error::Quadrature("geodesic ray does not leave the domain".into()));
            }
        }
        let (mut lo, mut hi) = (t, t + MARCH_STEP);
        for _ in 0..BISECTIONS {
            let mid = 0.5 * (lo + hi);
            if inside(mid, a) {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        Ok(0.5 * (lo + hi))
    };
    let mut cuts: Vec<f64> = corners
        .iter()
        .map(|&c| {
            let y = crate::stereographic::chart_to_sphere(&c);
            let dot = |e: &[f64]| (0..3).map(|d| e[d] * y[d]).sum::<f64>();
            dot(&frame[1]).atan2(dot(&frame[0])).rem_euclid(2.0 * PI)
        })
        .collect();
    if let Some(g) = gamma {
        let mut err = None;
        cuts.extend(sign_changes(0.0, 2.0 * PI, KINK_SAMPLES, |a| match exit(a) {
            Ok(t) => t - g,
            Err(e) => {
                err.get_or_insert(e);
                0.0
            }
        }));
        if let Some(e) = err {
            return Err(e);
        }
    }
    let panels = panelize(0.0, 2.0 * PI, cuts, MAX_PANEL);
    let ang = GaussRule::new(ANGULAR_NODES);
    let inner = GaussRule::new(INNER_NODES);
    let outer = GaussRule::new(OUTER_NODES);
    let mut out = Vec::new();
    for p in panels.windows(2) {
        for (a, wa) in ang.on(p[0], p[1]) {
            let tb = exit(a)?;
            let split = gamma.map_or(tb, |g| g.min(tb));
            let mut push = |t: f64, wt: f64| {
                let (st, ct) = t.sin_cos();
                let (sa, ca) = a.sin_cos();
                let y3 = point(t, a);
                let c = chart_of(&y3);
                out.push(QuadNode {
                    y: [y3[0], y3[1], y3[2], 0.0],
                    yr: [st * ca, st * sa, ct, 0.0],
                    theta_p: t,
                    w: wa * wt * st,
                    chart: c,
                    psi: 0.0,
                });
            };
            for (t, wt) in inner.on(0.0, split) {
                push(t, wt);
            }
            if tb > split {
                for (t, wt) in outer.on(split, tb) {
                    push(t, wt);
                }
            }
        }
    }
    Ok(out)
}

/// Roots of `f` on `[a, b]` located by sampling and bisection; near-zero
/// samples (tangencies, exact caps) are not treated as crossings.
fn sign_changes(a: f64, b: f64, samples: usize, mut f: impl FnMut(f64) -> f64) -> Vec<f64> {
    let xs: Vec<f64> = (0..=samples).map(|k| a + (b - a) * k as f64 / samples as f64).collect();
    let vals: Vec<f64> = xs.iter().map(|&x| f(x)).collect();
    let mut roots = Vec::new();
    for k in 0..samples {
        let (fa, fb) = (vals[k], vals[k + 1]);
        if !(fa.is_finite() && fb.is_finite()) || fa.abs() < 1e-10 || fb.abs() < 1e-10 || (fa > 0.0) == (fb > 0.0) {
            continue;
        }
        let (mut lo, mut hi, mut flo) = (xs[k], xs[k + 1], fa);
        for _ in 0..BISECTIONS {
            let mid = 0.5 * (lo + hi);
            let fm = f(mid);
            if (fm > 0.0) == (flo > 0.0) {
                lo = mid;
                flo = fm;
            } else {
                hi = mid;
            }
        }
        roots.push(0.5 * (lo + hi));
    }
    roots
}

/// Sorted panel edges on `[a, b]` containing `cuts`, no wider than `max_width`.
fn panelize(a: f64, b: f64, mut cuts: Vec<f64>, max_width: f64) -> Vec<f64> {
    cuts.retain(|c| *c > a + 1e-12 && *c < b - 1e-12);
    cuts.push(a);
    cuts.push(b);
    cuts.sort_by(f64::total_cmp);
    cuts.dedup_by(|x, y| (*x - *y).abs() < 1e-12);
    let mut out = vec![a];
    for w in cuts.windows(2) {
        let pieces = ((w[1] - w[0]) / max_width).ceil().max(1.0) as usize;
        for k in 1..=pieces {
            out.push(w[0] + (w[1] - w[0]) * k as f64 / pieces as f64);
        }
    }
    out
}
