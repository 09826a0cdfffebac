//! Stereographic chart of the sphere seen from the South Pole.
//!
//! A point at polar angle `theta` from the North Pole sits at chart radius
//! `s = tan(theta / 2)`, so the open hemisphere is the open unit ball. The
//! round metric is `p(s)^2` times the flat one with `p = 2 / (1 + s^2)`.

use crate::cap_spectrum::ExtendedProfile;
use crate::error::{Error, Result};
use crate::quadrature::integrate_adaptive;
use std::f64::consts::{FRAC_PI_2, PI};

/// Slack allowed on `s <= 1` before a point counts as outside the hemisphere.
pub const HEMISPHERE_SLACK: f64 = 1e-12;

pub fn theta_from_s(s: f64) -> f64 {
    2.0 * s.atan()
}

pub fn s_from_theta(theta: f64) -> f64 {
    (0.5 * theta).tan()
}

/// Conformal factor `p(s) = 2 / (1 + s^2)`; note `p(s) s = sin(theta)`.
pub fn conformal_factor(s: f64) -> f64 {
    2.0 / (1.0 + s * s)
}

/// A point of the chart with its radius and polar angle.
#[derive(Debug, Clone, PartialEq)]
pub struct ChartPoint {
    pub coords: Vec<f64>,
    pub s: f64,
    pub theta: f64,
}

impl ChartPoint {
    pub fn new(coords: Vec<f64>) -> Self {
        let s = coords.iter().map(|x| x * x).sum::<f64>().sqrt();
        Self { coords, s, theta: theta_from_s(s) }
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn in_hemisphere(&self) -> bool {
        self.s <= 1.0 + HEMISPHERE_SLACK
    }

    /// Point of `S^N` in `R^{N+1}`, last coordinate towards the North Pole.
    pub fn to_sphere(&self) -> Vec<f64> {
        chart_to_sphere(&self.coords)
    }
}

/// Inverse stereographic projection from the South Pole.
pub fn chart_to_sphere(x: &[f64]) -> Vec<f64> {
    let s2: f64 = x.iter().map(|v| v * v).sum();
    let d = 1.0 + s2;
    let mut out: Vec<f64> = x.iter().map(|v| 2.0 * v / d).collect();
    out.push((1.0 - s2) / d);
    out
}

/// Stereographic projection from the South Pole (undefined at the South Pole).
pub fn sphere_to_chart(y: &[f64]) -> Vec<f64> {
    let n = y.len() - 1;
    let d = 1.0 + y[n];
    y[..n].iter().map(|v| v / d).collect()
}

/// Volume of the unit ball of `R^N`, `pi^{N/2} / Gamma(N/2 + 1)`.
pub fn unit_ball_volume(dim: usize) -> f64 {
    let n = dim as f64;
    (0.5 * n * PI.ln() - libm::lgamma(0.5 * n + 1.0)).exp()
}

/// An `N`-volume on `S^N`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SphereVolume {
    pub dim: usize,
    pub value: f64,
    pub unit_ball_volume: f64,
}

impl SphereVolume {
    pub fn new(dim: usize, value: f64) -> Self {
        Self { dim, value, unit_ball_volume: unit_ball_volume(dim) }
    }
}

/// `N omega_N int_0^gamma sin^{N-1} t dt`.
pub fn cap_volume(dim: usize, gamma: f64) -> Result<SphereVolume> {
    if dim < 2 {
        return Err(Error::InvalidInput(format!("dimension must be >= 2, got {dim}")));
    }
    if !(gamma > 0.0 && gamma <= FRAC_PI_2 + 1e-15) {
        return Err(Error::InvalidInput(format!("cap radius must lie in (0, pi/2], got {gamma}")));
    }
    let omega = unit_ball_volume(dim);
    let k = dim as i32 - 1;
    let integral = integrate_adaptive(|t: f64| t.sin().powi(k), 0.0, gamma, 1e-15)?;
    Ok(SphereVolume { dim, value: dim as f64 * omega * integral, unit_ball_volume: omega })
}

pub fn hemisphere_volume(dim: usize) -> f64 {
    // int_0^{pi/2} sin^{N-1} = sqrt(pi) Gamma(N/2) / (2 Gamma((N+1)/2))
    let n = dim as f64;
    let half = 0.5 * PI.sqrt() * (libm::lgamma(0.5 * n) - libm::lgamma(0.5 * (n + 1.0))).exp();
    n * unit_ball_volume(dim) * half
}

/// Radius of the cap with the given volume.
pub fn equivalent_radius(dim: usize, volume: &SphereVolume) -> Result<f64> {
    if volume.dim != dim {
        return Err(Error::InvalidInput(format!("volume is for S^{} but dim = {dim}", volume.dim)));
    }
    let full = hemisphere_volume(dim);
    if !(volume.value > 0.0) {
        return Err(Error::InvalidInput(format!("volume must be positive, got {}", volume.value)));
    }
    if volume.value > full * (1.0 + 1e-12) {
        return Err(Error::HemisphereViolation(format!(
            "volume {} exceeds the hemisphere volume {full}",
            volume.value
        )));
    }
    if volume.value >= full {
        return Ok(FRAC_PI_2);
    }
    let (mut lo, mut hi) = (0.0f64, FRAC_PI_2);
    while hi - lo > 1e-14 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if cap_volume(dim, mid)?.value < volume.value {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// The trial functions `Phi_i(x) = G(theta) x_i / s`, `i = 1..N`.
#[derive(Debug, Clone, Copy)]
pub struct TestFunctionSet<'a> {
    pub profile: &'a ExtendedProfile,
    pub dim: usize,
}

impl<'a> TestFunctionSet<'a> {
    pub fn new(profile: &'a ExtendedProfile) -> Self {
        Self { profile, dim: profile.dim() }
    }

    fn values_at(&self, x: &[f64]) -> Vec<f64> {
        let s = x.iter().map(|v| v * v).sum::<f64>().sqrt();
        if s == 0.0 {
            return vec![0.0; x.len()];
        }
        let g = self.profile.value(theta_from_s(s));
        x.iter().map(|v| g * v / s).collect()
    }
}

/// `Phi_i` at a chart point; zero at the origin by continuity.
pub fn test_function_values(tf: &TestFunctionSet<'_>, point: &ChartPoint) -> Result<Vec<f64>> {
    if point.dim() != tf.dim {
        return Err(Error::InvalidInput(format!("point has {} coordinates, expected {}", point.dim(), tf.dim)));
    }
    Ok(tf.values_at(&point.coords))
}

/// Finite-difference check of the spherical gradient identities.
#[derive(Debug, Clone)]
pub struct GradientCheck {
    /// `sum_i |(1/p) grad Phi_i|^2 - (G'^2 + (N-1) G^2 / sin^2)`.
    pub residual: f64,
    /// Per-component deviation from `G'^2 u_i^2 + G^2 (1 - u_i^2) / sin^2`, `u = x/s`.
    pub component_residuals: Vec<f64>,
}

pub fn gradient_identity_check(tf: &TestFunctionSet<'_>, point: &ChartPoint, h: f64) -> Result<GradientCheck> {
    let n = tf.dim;
    if point.dim() != n {
        return Err(Error::InvalidInput(format!("point has {} coordinates, expected {n}", point.dim())));
    }
    let p = conformal_factor(point.s);
    let gamma = tf.profile.gamma;
    // theta moves by at most p h per coordinate step
    if point.s <= 4.0 * h || (point.theta - gamma).abs() <= 4.0 * p * h {
        return Err(Error::InvalidInput(format!(
            "check point (s = {}, theta = {}) is within the stencil of the origin or of theta = gamma",
            point.s, point.theta
        )));
    }
    let mut grads = vec![vec![0.0; n]; n];
    let mut shifted = point.coords.clone();
    for j in 0..n {
        shifted[j] = point.coords[j] + h;
        let plus = tf.values_at(&shifted);
        shifted[j] = point.coords[j] - h;
        let minus = tf.values_at(&shifted);
        shifted[j] = point.coords[j];
        for i in 0..n {
            grads[i][j] = (plus[i] - minus[i]) / (2.0 * h);
        }
    }
    let (g, gp) = tf.profile.eval(point.theta);
    let sin = point.theta.sin();
    let mut total = 0.0;
    let mut component_residuals = Vec::with_capacity(n);
    for i in 0..n {
        let norm2 = grads[i].iter().map(|v| v * v).sum::<f64>() / (p * p);
        let u2 = (point.coords[i] / point.s).powi(2);
        component_residuals.push(norm2 - (gp * gp * u2 + g * g * (1.0 - u2) / (sin * sin)));
        total += norm2;
    }
    let expected = gp * gp + (n as f64 - 1.0) * g * g / (sin * sin);
    Ok(GradientCheck { residual: total - expected, component_residuals })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cap_spectrum::cap_profile;
    use std::f64::consts::FRAC_PI_3;

    #[test]
    fn chart_landmarks() {
        assert_eq!(theta_from_s(0.0), 0.0);
        assert!((theta_from_s(1.0) - FRAC_PI_2).abs() < 1e-15);
        assert_eq!(conformal_factor(0.0), 2.0);
        assert_eq!(conformal_factor(1.0), 1.0);
    }

    #[test]
    fn cap_volume_closed_forms() {
        assert!((cap_volume(2, FRAC_PI_2).unwrap().value - 2.0 * PI).abs() < 1e-12);
        assert!((cap_volume(2, FRAC_PI_3).unwrap().value - PI).abs() < 1e-12);
        assert!((cap_volume(3, FRAC_PI_2).unwrap().value - PI * PI).abs() < 1e-12);
        assert!((hemisphere_volume(3) - PI * PI).abs() < 1e-12);
        assert!((hemisphere_volume(2) - 2.0 * PI).abs() < 1e-12);
    }

    #[test]
    fn unit_ball_volumes() {
        assert!((unit_ball_volume(2) - PI).abs() < 1e-14);
        assert!((unit_ball_volume(3) - 4.0 * PI / 3.0).abs() < 1e-14);
        assert!((unit_ball_volume(4) - PI * PI / 2.0).abs() < 1e-13);
    }

    #[test]
    fn equivalent_radius_inverts_cap_volume() {
        assert!((equivalent_radius(2, &SphereVolume::new(2, 2.0 * PI)).unwrap() - FRAC_PI_2).abs() < 1e-12);
        assert!((equivalent_radius(2, &SphereVolume::new(2, PI)).unwrap() - FRAC_PI_3).abs() < 1e-12);
        let g = equivalent_radius(3, &SphereVolume::new(3, PI * PI / 2.0)).unwrap();
        // 2 pi (g - sin g cos g) = pi^2 / 2
        assert!((2.0 * PI * (g - g.sin() * g.cos()) - PI * PI / 2.0).abs() < 1e-11);
    }

    #[test]
    fn oversized_volume_is_rejected() {
        let err = equivalent_radius(2, &SphereVolume::new(2, 7.0)).unwrap_err();
        assert!(matches!(err, Error::HemisphereViolation(_)));
    }

    #[test]
    fn test_functions_at_landmarks() {
        let g = cap_profile(2, FRAC_PI_3).unwrap();
        let tf = TestFunctionSet::new(&g);
        assert_eq!(test_function_values(&tf, &ChartPoint::new(vec![0.0, 0.0])).unwrap(), vec![0.0, 0.0]);
        let v = test_function_values(&tf, &ChartPoint::new(vec![1.0, 0.0])).unwrap();
        assert_eq!(v, vec![g.value(FRAC_PI_2), 0.0]);
    }

    #[test]
    fn gradient_check_refuses_kink_and_origin() {
        let g = cap_profile(2, FRAC_PI_3).unwrap();
        let tf = TestFunctionSet::new(&g);
        let at_kink = ChartPoint::new(vec![s_from_theta(FRAC_PI_3), 0.0]);
        assert!(gradient_identity_check(&tf, &at_kink, 1e-3).is_err());
        assert!(gradient_identity_check(&tf, &ChartPoint::new(vec![1e-3, 0.0]), 1e-3).is_err());
    }
}
