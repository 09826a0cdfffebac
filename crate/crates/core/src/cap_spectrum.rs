//! Neumann spectrum of geodesic caps on S^N.
//!
//! Separation of variables on the polar cap `D_gamma` reduces the
//! Laplace-Beltrami eigenproblem to the singular radial problems
//!
//! ```text
//! -y'' - (N-1) cot(t) y' + l(l+N-2)/sin^2(t) y = mu y   on (0, gamma)
//! y(0) finite,  y'(gamma) = 0
//! ```
//!
//! which are solved here by shooting from a Frobenius series at `t = 0`.
//! The first nontrivial cap eigenvalue is `mu_{1,1}` and its profile `g`
//! (normalized by `g'(0) = 1`) drives the monotonicity lemma checks.

use crate::error::{Error, Result};
use crate::ode::{Dopri5, State};
use crate::quadrature::GaussRule;
use std::f64::consts::{FRAC_PI_2, PI};

/// Left end of the shooting interval; the series covers `[0, START_ANGLE]`.
pub const START_ANGLE: f64 = 1e-4;
/// Number of output samples on `[0, gamma]`.
pub const GRID_POINTS: usize = 2048;
/// Relative tolerance of the shooting integrator.
pub const INTEGRATOR_RTOL: f64 = 1e-11;
/// Eigenvalues of the two lowest candidate modes closer than this are a tie.
pub const TIE_TOLERANCE: f64 = 1e-10;

const SERIES_TERMS: usize = 4;

/// One radial problem: sphere dimension, cap radius and angular index.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CapProblem {
    dim: usize,
    gamma: f64,
    mode_l: usize,
}

impl CapProblem {
    pub fn new(dim: usize, gamma: f64, mode_l: usize) -> Result<Self> {
        if dim < 2 {
            return Err(Error::InvalidInput(format!("sphere dimension must be >= 2, got {dim}")));
        }
        if !(gamma > 0.0 && gamma <= FRAC_PI_2 + 1e-15) {
            return Err(Error::InvalidInput(format!("cap radius must lie in (0, pi/2], got {gamma}")));
        }
        Ok(Self { dim, gamma: gamma.min(FRAC_PI_2), mode_l })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn mode_l(&self) -> usize {
        self.mode_l
    }

    /// `l (l + N - 2)`.
    pub fn potential_coefficient(&self) -> f64 {
        let l = self.mode_l as f64;
        l * (l + self.dim as f64 - 2.0)
    }

    fn rhs(&self, mu: f64) -> impl Fn(f64, &State) -> State {
        let n1 = self.dim as f64 - 1.0;
        let big_l = self.potential_coefficient();
        move |t, y| {
            let s = t.sin();
            [y[1], -n1 * t.cos() / s * y[1] + (big_l / (s * s) - mu) * y[0]]
        }
    }
}

/// Truncated Frobenius series `y = t^l (a0 + a2 t^2 + a4 t^4 + a6 t^6)` with `a0 = 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrobeniusSeries {
    mode_l: usize,
    coefficients: [f64; SERIES_TERMS],
}

impl FrobeniusSeries {
    /// Substitutes the series into `sin^2 y'' + (N-1) sin cos y' + (mu sin^2 - L) y = 0`
    /// and solves the resulting recurrence order by order. The `L` term only
    /// enters through the indicial factor `j (j + 2l + N - 2)`.
    pub fn new(problem: &CapProblem, mu: f64) -> Self {
        // sin^2 t = (1 - cos 2t)/2 = sum s[k] t^k, sin t cos t = sin(2t)/2 = sum c[k] t^k
        let mut s = [0.0f64; 2 * SERIES_TERMS + 2];
        let mut c = [0.0f64; 2 * SERIES_TERMS + 2];
        let mut fact = 1.0f64;
        for k in 1..s.len() {
            fact *= k as f64;
            let m = k / 2;
            let sign = if m % 2 == 0 { 1.0 } else { -1.0 };
            if k % 2 == 0 {
                s[k] = -0.5 * sign * 2.0f64.powi(k as i32) / fact;
            } else {
                c[k] = 0.5 * sign * 2.0f64.powi(k as i32) / fact;
            }
        }
        let l = problem.mode_l as f64;
        let n1 = problem.dim as f64 - 1.0;
        let mut a = [0.0f64; SERIES_TERMS];
        a[0] = 1.0;
        for m in 1..SERIES_TERMS {
            let j = 2 * m;
            let mut sum = 0.0;
            for (q, &an) in a.iter().enumerate().take(m) {
                let n = 2 * q;
                let e = n as f64 + l;
                sum += an * (e * (e - 1.0) * s[j - n + 2] + n1 * e * c[j - n + 1] + mu * s[j - n]);
            }
            let jf = j as f64;
            a[m] = -sum / (jf * (jf + 2.0 * l + n1 - 1.0));
        }
        Self { mode_l: problem.mode_l, coefficients: a }
    }

    pub fn coefficients(&self) -> [f64; SERIES_TERMS] {
        self.coefficients
    }

    /// `(y, y', y'')` at `t >= 0`.
    pub fn eval(&self, t: f64) -> [f64; 3] {
        let mut out = [0.0; 3];
        for (m, &a) in self.coefficients.iter().enumerate() {
            let e = (2 * m + self.mode_l) as i32;
            let ef = e as f64;
            out[0] += a * t.powi(e);
            if e >= 1 {
                out[1] += a * ef * t.powi(e - 1);
            }
            if e >= 2 {
                out[2] += a * ef * (ef - 1.0) * t.powi(e - 2);
            }
        }
        out
    }
}

/// Shooting phase: the continuously unwrapped angle of `(y', y)` at `gamma`.
/// It increases with `mu`, and `mu_{l,k}` is where it equals `pi/2 + (k-1) pi`.
fn shooting_phase(problem: &CapProblem, mu: f64) -> Result<(f64, State)> {
    let series = FrobeniusSeries::new(problem, mu);
    let y0 = series.eval(START_ANGLE);
    let start: State = [y0[0], y0[1]];
    let scale = start[0].abs().max(start[1].abs());
    let mut ode = Dopri5::new(INTEGRATOR_RTOL, 1e-16 * scale.max(1e-300));
    let rhs = problem.rhs(mu);
    let mut prev = start[0].atan2(start[1]);
    let mut total = prev;
    let end = ode.advance(&rhs, START_ANGLE, start, problem.gamma, |_, y| {
        let raw = y[0].atan2(y[1]);
        let mut d = raw - prev;
        if d > PI {
            d -= 2.0 * PI;
        } else if d <= -PI {
            d += 2.0 * PI;
        }
        total += d;
        prev = raw;
    })?;
    Ok((total, end))
}

/// A single radial eigenpair `(mu_{l,k}, y)` sampled on a uniform grid.
#[derive(Debug, Clone)]
pub struct RadialEigenpair {
    pub mu: f64,
    pub k: usize,
    pub theta_grid: Vec<f64>,
    pub y_values: Vec<f64>,
    pub y_prime_values: Vec<f64>,
    problem: CapProblem,
    series: FrobeniusSeries,
    second: Vec<f64>,
}

impl RadialEigenpair {
    fn from_grid(problem: CapProblem, mu: f64, k: usize) -> Result<Self> {
        let series = FrobeniusSeries::new(&problem, mu);
        let gamma = problem.gamma;
        let theta_grid: Vec<f64> = (0..GRID_POINTS).map(|i| gamma * i as f64 / (GRID_POINTS - 1) as f64).collect();
        let mut y_values = Vec::with_capacity(GRID_POINTS);
        let mut y_prime_values = Vec::with_capacity(GRID_POINTS);
        let at0 = series.eval(0.0);
        y_values.push(at0[0]);
        y_prime_values.push(at0[1]);
        let init = series.eval(START_ANGLE);
        let mut state: State = [init[0], init[1]];
        let mut t = START_ANGLE;
        let scale = state[0].abs().max(state[1].abs());
        let mut ode = Dopri5::new(INTEGRATOR_RTOL, 1e-16 * scale.max(1e-300));
        let rhs = problem.rhs(mu);
        for &node in &theta_grid[1..] {
            if node <= START_ANGLE {
                let v = series.eval(node);
                y_values.push(v[0]);
                y_prime_values.push(v[1]);
                continue;
            }
            state = ode.advance(&rhs, t, state, node, |_, _| {})?;
            t = node;
            y_values.push(state[0]);
            y_prime_values.push(state[1]);
        }
        let mut pair = Self { mu, k, theta_grid, y_values, y_prime_values, problem, series, second: Vec::new() };
        pair.second = (0..GRID_POINTS)
            .map(|i| {
                if i == 0 {
                    series.eval(0.0)[2]
                } else {
                    pair.second_derivative(pair.theta_grid[i], pair.y_values[i], pair.y_prime_values[i])
                }
            })
            .collect();
        Ok(pair)
    }

    pub fn problem(&self) -> &CapProblem {
        &self.problem
    }

    pub fn dim(&self) -> usize {
        self.problem.dim
    }

    pub fn gamma(&self) -> f64 {
        self.problem.gamma
    }

    pub fn mode_l(&self) -> usize {
        self.problem.mode_l
    }

    pub fn series(&self) -> &FrobeniusSeries {
        &self.series
    }

    /// `y''` from the differential equation itself.
    pub fn second_derivative(&self, t: f64, y: f64, yp: f64) -> f64 {
        let s = t.sin();
        -(self.problem.dim as f64 - 1.0) * t.cos() / s * yp
            + (self.problem.potential_coefficient() / (s * s) - self.mu) * y
    }

    /// `(y, y')` anywhere in `[0, gamma]`: the series below the shooting start,
    /// quintic Hermite interpolation of `(y, y', y'')` elsewhere.
    pub fn eval(&self, t: f64) -> (f64, f64) {
        let gamma = self.problem.gamma;
        let t = t.clamp(0.0, gamma);
        if t <= START_ANGLE {
            let v = self.series.eval(t);
            return (v[0], v[1]);
        }
        let dt = gamma / (GRID_POINTS - 1) as f64;
        let j = ((t / dt) as usize).min(GRID_POINTS - 2);
        let u = (t - self.theta_grid[j]) / dt;
        hermite5(
            u,
            dt,
            [self.y_values[j], self.y_prime_values[j], self.second[j]],
            [self.y_values[j + 1], self.y_prime_values[j + 1], self.second[j + 1]],
        )
    }

    /// Neumann mismatch `|y'(gamma)|` relative to `max |y'|`.
    pub fn neumann_mismatch(&self) -> f64 {
        let scale = self.y_prime_values.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(f64::MIN_POSITIVE);
        self.y_prime_values[GRID_POINTS - 1].abs() / scale
    }

    /// Max over interior nodes of the pointwise equation residual, with `y''`
    /// taken from a fourth-order difference of the sampled `y'` and each point
    /// normalized by the magnitude of the individual terms.
    pub fn ode_residual(&self) -> f64 {
        let n = GRID_POINTS;
        let dt = self.problem.gamma / (n - 1) as f64;
        let n1 = self.problem.dim as f64 - 1.0;
        let big_l = self.problem.potential_coefficient();
        let yp = &self.y_prime_values;
        let mut worst = 0.0f64;
        for i in 2..n - 2 {
            let t = self.theta_grid[i];
            let ypp = (-yp[i + 2] + 8.0 * yp[i + 1] - 8.0 * yp[i - 1] + yp[i - 2]) / (12.0 * dt);
            let s = t.sin();
            let a = ypp;
            let b = n1 * t.cos() / s * yp[i];
            let c = (big_l / (s * s) - self.mu) * self.y_values[i];
            let scale = a.abs() + b.abs() + c.abs();
            if scale > 0.0 {
                worst = worst.max((a + b - c).abs() / scale);
            }
        }
        worst
    }
}

fn hermite5(u: f64, h: f64, left: [f64; 3], right: [f64; 3]) -> (f64, f64) {
    let u2 = u * u;
    let u3 = u2 * u;
    let u4 = u3 * u;
    let u5 = u4 * u;
    let h0 = 1.0 - 10.0 * u3 + 15.0 * u4 - 6.0 * u5;
    let h1 = u - 6.0 * u3 + 8.0 * u4 - 3.0 * u5;
    let h2 = 0.5 * (u2 - 3.0 * u3 + 3.0 * u4 - u5);
    let h3 = 10.0 * u3 - 15.0 * u4 + 6.0 * u5;
    let h4 = -4.0 * u3 + 7.0 * u4 - 3.0 * u5;
    let h5 = 0.5 * (u3 - 2.0 * u4 + u5);
    let d0 = -30.0 * u2 + 60.0 * u3 - 30.0 * u4;
    let d1 = 1.0 - 18.0 * u2 + 32.0 * u3 - 15.0 * u4;
    let d2 = 0.5 * (2.0 * u - 9.0 * u2 + 12.0 * u3 - 5.0 * u4);
    let d3 = 30.0 * u2 - 60.0 * u3 + 30.0 * u4;
    let d4 = -12.0 * u2 + 28.0 * u3 - 15.0 * u4;
    let d5 = 0.5 * (3.0 * u2 - 8.0 * u3 + 5.0 * u4);
    let value = left[0] * h0
        + h * left[1] * h1
        + h * h * left[2] * h2
        + right[0] * h3
        + h * right[1] * h4
        + h * h * right[2] * h5;
    let slope = (left[0] * d0
        + h * left[1] * d1
        + h * h * left[2] * d2
        + right[0] * d3
        + h * right[1] * d4
        + h * h * right[2] * d5)
        / h;
    (value, slope)
}

/// Finds `mu` with `phase(mu) = target` given a bracket `lo < mu < hi`.
fn solve_phase(problem: &CapProblem, target: f64, mut lo: f64, mut hi: f64) -> Result<f64> {
    let mut f_lo = shooting_phase(problem, lo)?.0 - target;
    let mut f_hi = shooting_phase(problem, hi)?.0 - target;
    if f_lo > 0.0 || f_hi < 0.0 {
        return Err(Error::Shooting(format!("phase does not bracket the target on [{lo}, {hi}]")));
    }
    let mut iterations = 0;
    while hi - lo > 1e-12 * hi.abs().max(1.0) {
        iterations += 1;
        if iterations > 200 {
            return Err(Error::Shooting("bisection did not converge".into()));
        }
        let mid = 0.5 * (lo + hi);
        let f_mid = shooting_phase(problem, mid)?.0 - target;
        if f_mid == 0.0 {
            return Ok(mid);
        }
        if f_mid < 0.0 {
            lo = mid;
            f_lo = f_mid;
        } else {
            hi = mid;
            f_hi = f_mid;
        }
    }
    // secant polish inside the final bracket
    let mut mu = lo - f_lo * (hi - lo) / (f_hi - f_lo);
    for _ in 0..2 {
        if !(mu > lo && mu < hi) {
            mu = 0.5 * (lo + hi);
            break;
        }
        let f = shooting_phase(problem, mu)?.0 - target;
        if f.abs() < f_lo.abs().min(f_hi.abs()) {
            if f < 0.0 {
                lo = mu;
                f_lo = f;
            } else {
                hi = mu;
                f_hi = f;
            }
            if f_hi == f_lo {
                break;
            }
            mu = lo - f_lo * (hi - lo) / (f_hi - f_lo);
        } else {
            mu = if f_lo.abs() < f_hi.abs() { lo } else { hi };
            break;
        }
    }
    Ok(mu)
}

/// The first `k_max` eigenpairs `mu_{l,1} < ... < mu_{l,k_max}` of one radial problem.
pub fn solve_mode(problem: &CapProblem, k_max: usize) -> Result<Vec<RadialEigenpair>> {
    if k_max == 0 {
        return Err(Error::InvalidInput("k_max must be >= 1".into()));
    }
    let mut pairs = Vec::with_capacity(k_max);
    let mut lo: f64 = if problem.mode_l == 0 { -1.0 } else { 0.0 };
    for k in 1..=k_max {
        let mu = if problem.mode_l == 0 && k == 1 {
            // constants are the exact ground state
            0.0
        } else {
            let target = FRAC_PI_2 + (k as f64 - 1.0) * PI;
            let mut hi = lo + lo.abs().max(1.0);
            let mut expansions = 0;
            while shooting_phase(problem, hi)?.0 < target {
                lo = hi;
                hi *= 2.0;
                expansions += 1;
                if expansions > 60 || hi > 1e14 {
                    return Err(Error::Shooting(format!("no bracket found for k = {k}")));
                }
            }
            solve_phase(problem, target, lo, hi)?
        };
        pairs.push(RadialEigenpair::from_grid(*problem, mu, k)?);
        lo = mu;
    }
    Ok(pairs)
}

/// First nontrivial cap eigenvalue with the mode that attains it.
#[derive(Debug, Clone)]
pub struct CapMu1 {
    pub value: f64,
    pub mu_11: f64,
    pub mu_02: f64,
    /// True when `mu_{1,1}` attains the minimum.
    pub attained_by_l1: bool,
    pub warning: Option<String>,
}

/// `min(mu_{0,2}, mu_{1,1})` for the cap of radius `gamma` on `S^dim`.
pub fn mu1_cap(dim: usize, gamma: f64) -> Result<CapMu1> {
    let mu_11 = solve_mode(&CapProblem::new(dim, gamma, 1)?, 1)?[0].mu;
    let mu_02 = solve_mode(&CapProblem::new(dim, gamma, 0)?, 2)?[1].mu;
    let (value, attained_by_l1, warning) = if (mu_02 - mu_11).abs() < TIE_TOLERANCE {
        (mu_11, true, Some(format!("mu_02 and mu_11 tie within {TIE_TOLERANCE:e}")))
    } else if mu_11 < mu_02 {
        (mu_11, true, None)
    } else {
        (mu_02, false, None)
    };
    Ok(CapMu1 { value, mu_11, mu_02, attained_by_l1, warning })
}

/// Cubic coefficient `a` in `g(t) = t - a t^3 + o(t^3)`.
pub fn frobenius_coefficient(mu1: f64, dim: usize) -> f64 {
    let n = dim as f64;
    (mu1 - 2.0 / 3.0 * (n - 1.0)) / (2.0 * n + 4.0)
}

/// Fits `c1 t + c3 t^3 + c5 t^5` to the solved samples on
/// `(0, min(0.05, gamma/2)]` and returns `-c3 / c1`, the `a` of the profile
/// rescaled to `t - a t^3 + ...`.
pub fn fitted_cubic_coefficient(pair: &RadialEigenpair) -> f64 {
    let t_max = (0.5 * pair.gamma()).min(0.05);
    let mut ata = nalgebra::Matrix3::<f64>::zeros();
    let mut atb = nalgebra::Vector3::<f64>::zeros();
    for (&t, &y) in pair.theta_grid.iter().zip(&pair.y_values) {
        if t <= 0.0 || t > t_max {
            continue;
        }
        let u = t / t_max;
        let row = nalgebra::Vector3::new(u, u.powi(3), u.powi(5));
        ata += row * row.transpose();
        atb += row * y;
    }
    let c = ata.lu().solve(&atb).unwrap_or_else(nalgebra::Vector3::zeros);
    -(c[1] / t_max.powi(3)) / (c[0] / t_max)
}

/// The profile `g` of `mu_{1,1}` continued by the constant `g(gamma)` up to `pi/2`.
#[derive(Debug, Clone)]
pub struct ExtendedProfile {
    pub gamma: f64,
    pub profile: RadialEigenpair,
    pub plateau: f64,
}

impl ExtendedProfile {
    /// `(G, G')` on `[0, pi/2]` (and beyond, where it stays constant).
    pub fn eval(&self, t: f64) -> (f64, f64) {
        if t <= self.gamma {
            self.profile.eval(t)
        } else {
            (self.plateau, 0.0)
        }
    }

    pub fn value(&self, t: f64) -> f64 {
        self.eval(t).0
    }

    pub fn dim(&self) -> usize {
        self.profile.dim()
    }

    pub fn mu(&self) -> f64 {
        self.profile.mu
    }
}

/// Builds `G` from the `(l = 1, k = 1)` eigenpair.
pub fn extend_profile(g: RadialEigenpair, gamma: f64) -> Result<ExtendedProfile> {
    if g.mode_l() != 1 || g.k != 1 {
        return Err(Error::InvalidInput(format!(
            "extension needs the (l=1, k=1) eigenpair, got (l={}, k={})",
            g.mode_l(),
            g.k
        )));
    }
    if (gamma - g.gamma()).abs() > 1e-14 {
        return Err(Error::InvalidInput(format!("profile radius {} differs from gamma {gamma}", g.gamma())));
    }
    let tol = 1e-9 * g.y_prime_values[0].abs();
    for (i, (&t, &yp)) in g.theta_grid.iter().zip(&g.y_prime_values).enumerate() {
        if i + 1 < GRID_POINTS && yp <= tol {
            return Err(Error::NonMonotoneProfile { theta: t });
        }
    }
    let plateau = *g.y_values.last().unwrap();
    Ok(ExtendedProfile { gamma, profile: g, plateau })
}

/// Solves the `(1, 1)` mode and extends it.
pub fn cap_profile(dim: usize, gamma: f64) -> Result<ExtendedProfile> {
    let pair = solve_mode(&CapProblem::new(dim, gamma, 1)?, 1)?.remove(0);
    extend_profile(pair, gamma)
}

/// Outcome of the monotonicity lemma checks.
#[derive(Debug, Clone)]
pub struct LemmaReport {
    pub frobenius_a: f64,
    /// Max of `W = G' - G cot t` over the check grid in `(0, gamma]`.
    pub max_w: f64,
    /// Largest consecutive difference of `G / sin t` on `(0, pi/2]`.
    pub max_ratio_step: f64,
    /// `G / sin t` is non-increasing (within 1e-10).
    pub ratio_monotone: bool,
    /// The strict form of the lemma applies (`gamma < pi/2`).
    pub strict: bool,
}

/// First angle of the lemma check grid.
pub const LEMMA_GRID_START: f64 = 1e-3;
/// Points of the lemma check grid.
pub const LEMMA_GRID_POINTS: usize = 10_000;

pub fn check_lemma(profile: &ExtendedProfile, dim: usize, mu1: f64) -> LemmaReport {
    let frobenius_a = frobenius_coefficient(mu1, dim);
    let grid = |end: f64| {
        (0..LEMMA_GRID_POINTS)
            .map(move |i| LEMMA_GRID_START + (end - LEMMA_GRID_START) * i as f64 / (LEMMA_GRID_POINTS - 1) as f64)
    };
    let max_w = grid(profile.gamma)
        .map(|t| {
            let (g, gp) = profile.eval(t);
            gp - g * t.cos() / t.sin()
        })
        .fold(f64::NEG_INFINITY, f64::max);
    let ratios: Vec<f64> = grid(FRAC_PI_2).map(|t| profile.value(t) / t.sin()).collect();
    let max_ratio_step = ratios.windows(2).map(|w| w[1] - w[0]).fold(f64::NEG_INFINITY, f64::max);
    LemmaReport {
        frobenius_a,
        max_w,
        max_ratio_step,
        ratio_monotone: max_ratio_step <= 1e-10,
        strict: profile.gamma < FRAC_PI_2,
    }
}

/// `int [y'^2 + L y^2 / sin^2] sin^{N-1} / int y^2 sin^{N-1}` over `(0, gamma)`.
pub fn rayleigh_quotient_radial(g: &RadialEigenpair, dim: usize, gamma: f64) -> Result<f64> {
    if dim != g.dim() || gamma > g.gamma() + 1e-14 {
        return Err(Error::InvalidInput("profile does not match the requested dimension or radius".into()));
    }
    let big_l = CapProblem::new(dim, g.gamma(), g.mode_l())?.potential_coefficient();
    let rule = GaussRule::new(4);
    let n1 = dim as i32 - 1;
    let mut num = 0.0;
    let mut den = 0.0;
    let dt = g.gamma() / (GRID_POINTS - 1) as f64;
    for j in 0..GRID_POINTS - 1 {
        let a = j as f64 * dt;
        if a >= gamma {
            break;
        }
        let b = ((j + 1) as f64 * dt).min(gamma);
        for (t, w) in rule.on(a, b) {
            let (y, yp) = g.eval(t);
            let s = t.sin();
            let weight = s.powi(n1);
            // y^2 / sin^2 stays bounded: y ~ t^l with l >= 1 whenever L > 0
            let potential = if big_l > 0.0 { big_l * (y / s) * (y / s) } else { 0.0 };
            num += w * weight * (yp * yp + potential);
            den += w * weight * y * y;
        }
    }
    if !(num.is_finite() && den > 0.0) {
        return Err(Error::Quadrature("radial Rayleigh quotient is not finite".into()));
    }
    Ok(num / den)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_PI_3;

    #[test]
    fn series_matches_sine_for_dipole_on_s2() {
        let p = CapProblem::new(2, FRAC_PI_2, 1).unwrap();
        let s = FrobeniusSeries::new(&p, 2.0);
        let c = s.coefficients();
        assert!((c[1] + 1.0 / 6.0).abs() < 1e-15);
        assert!((c[2] - 1.0 / 120.0).abs() < 1e-15);
        assert!((c[3] + 1.0 / 5040.0).abs() < 1e-15);
    }

    #[test]
    fn series_matches_second_zonal_harmonic() {
        // (3 cos^2 - 1)/2 = 1 - 3 t^2 / 2 + ... for mu = 6 on S^2
        let p = CapProblem::new(2, FRAC_PI_2, 0).unwrap();
        let c = FrobeniusSeries::new(&p, 6.0).coefficients();
        let t = 0.01f64;
        let exact = 1.0 - 1.5 * t.sin().powi(2);
        let series: f64 = c.iter().enumerate().map(|(m, a)| a * t.powi(2 * m as i32)).sum();
        assert!((exact - series).abs() < 1e-15);
    }

    #[test]
    fn hemisphere_dipole_and_zonal_modes() {
        let l1 = solve_mode(&CapProblem::new(2, FRAC_PI_2, 1).unwrap(), 1).unwrap();
        assert!((l1[0].mu - 2.0).abs() < 1e-9);
        for (&t, &y) in l1[0].theta_grid.iter().zip(&l1[0].y_values) {
            assert!((y - t.sin()).abs() < 1e-9);
        }
        let l0 = solve_mode(&CapProblem::new(2, FRAC_PI_2, 0).unwrap(), 2).unwrap();
        assert_eq!(l0[0].mu, 0.0);
        assert!(l0[0].y_values.iter().all(|&y| y == 1.0));
        assert!((l0[1].mu - 6.0).abs() < 1e-8);
        for (&t, &y) in l0[1].theta_grid.iter().zip(&l0[1].y_values) {
            let p2 = 1.5 * t.cos().powi(2) - 0.5;
            assert!((y - p2).abs() < 1e-8, "t={t}");
        }
    }

    #[test]
    fn eigenvalues_increase_with_k_and_satisfy_neumann() {
        let p = CapProblem::new(3, FRAC_PI_3, 1).unwrap();
        let pairs = solve_mode(&p, 4).unwrap();
        for w in pairs.windows(2) {
            assert!(w[1].mu > w[0].mu);
        }
        for pair in &pairs {
            assert!(pair.neumann_mismatch() < 1e-8, "k={} mismatch={}", pair.k, pair.neumann_mismatch());
            assert!(pair.ode_residual() < 1e-8, "k={} residual={}", pair.k, pair.ode_residual());
        }
    }

    #[test]
    fn invalid_problems_are_rejected() {
        assert!(CapProblem::new(1, 1.0, 1).is_err());
        assert!(CapProblem::new(2, 0.0, 1).is_err());
        assert!(CapProblem::new(2, 1.7, 1).is_err());
        assert!(solve_mode(&CapProblem::new(2, 1.0, 1).unwrap(), 0).is_err());
    }

    #[test]
    fn frobenius_formula_examples() {
        assert!((frobenius_coefficient(2.0, 2) - 1.0 / 6.0).abs() < 1e-15);
        assert!((frobenius_coefficient(3.0, 3) - 1.0 / 6.0).abs() < 1e-15);
    }

    #[test]
    fn rayleigh_quotient_of_sine_on_hemisphere() {
        let g = solve_mode(&CapProblem::new(2, FRAC_PI_2, 1).unwrap(), 1).unwrap().remove(0);
        let rq = rayleigh_quotient_radial(&g, 2, FRAC_PI_2).unwrap();
        assert!((rq - 2.0).abs() < 1e-9);
    }

    #[test]
    fn extension_is_flat_past_gamma() {
        let g = cap_profile(2, FRAC_PI_3).unwrap();
        let (v, d) = g.eval(FRAC_PI_2);
        assert_eq!(v, g.plateau);
        assert_eq!(d, 0.0);
        let left = g.value(FRAC_PI_3 - 1e-12);
        assert!((left - g.plateau).abs() < 1e-11);
    }

    #[test]
    fn extension_rejects_wrong_mode() {
        let g = solve_mode(&CapProblem::new(2, 1.0, 0).unwrap(), 2).unwrap().remove(1);
        assert!(extend_profile(g, 1.0).is_err());
    }

    #[test]
    fn lemma_on_hemisphere_is_flat() {
        let g = cap_profile(2, FRAC_PI_2).unwrap();
        let report = check_lemma(&g, 2, g.mu());
        assert!(report.max_w.abs() < 1e-10);
        assert!(report.max_ratio_step.abs() < 1e-10);
        assert!(report.ratio_monotone);
        assert!(!report.strict);
        assert!((report.frobenius_a - 1.0 / 6.0).abs() < 1e-9);
    }
}
