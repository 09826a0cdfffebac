//! End-to-end check of the harmonic-mean inequality
//! `sum_{i<N} 1/mu_i(Omega) >= (N-1)/mu_1(D_gamma)` and of the intermediate
//! inequalities of its proof, for one domain or a family of domains.

mod corpus;
mod region;
mod rotation;
mod spectrum;
mod sweep;

use std::fmt::Write as _;

pub use corpus::{corpus, CorpusEntry, Expectation};
pub use region::PSI_NODES;
pub use rotation::{find_balancing_rotation, Balancing, Rotation, BALANCE_TOL};
pub use spectrum::{domain_spectrum, DomainSpectrum, Eigenmode, ModeEvaluator};
pub use sweep::{cap_sweep, set_parameter, sweep, write_cap_csv, write_sweep_csv, CapSweepRow, SweepRow};

use crate::cap_spectrum::{cap_profile, mu1_cap, ExtendedProfile};
use crate::error::{Error, Result};
use crate::mesh::{mesh_volume, DomainSpec};
use crate::quadrature::GaussRule;
use crate::stereographic::{equivalent_radius, unit_ball_volume, SphereVolume};
use region::{QuadNode, Region};

/// Floor of the pass threshold on the margin.
pub const MARGIN_FLOOR: f64 = 1e-3;
/// `C` in the threshold `max(1e-3, C h^2)`, from the cap error constant.
pub const MARGIN_H2_CONSTANT: f64 = 0.5;
/// Relative slack for the sign checks of the quadrature-based proof steps.
pub const QUADRATURE_SLACK: f64 = 1e-9;
/// Relative agreement of the two sides of the proof steps on caps.
pub const CAP_EQUALITY_TOL: f64 = 1e-6;

pub fn margin_tolerance(h: f64) -> f64 {
    MARGIN_FLOOR.max(MARGIN_H2_CONSTANT * h * h)
}

#[derive(Debug, Clone)]
pub struct VerifyOptions {
    pub h: f64,
    pub refinements: usize,
    pub proof_steps: bool,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        Self { h: 0.04, refinements: 1, proof_steps: true }
    }
}

/// Numbers behind the steps of the proof, evaluated on the exact domain in
/// the balanced orientation.
#[derive(Debug, Clone)]
pub struct ProofReport {
    pub rotation: Rotation,
    pub balancing_residual: f64,
    pub balancing_scale: f64,
    /// `int_Omega G^2 / sin^2` and its cap counterpart.
    pub omega_g2_over_sin2: f64,
    pub cap_g2_over_sin2: f64,
    /// `int_Omega G^2` and its cap counterpart.
    pub omega_g2: f64,
    pub cap_g2: f64,
    /// `int_{D_gamma} G'^2`.
    pub cap_gprime2: f64,
    /// Difference of the two sides of the `G/sin` comparison (should be <= 0).
    pub step21: f64,
    /// Difference of the two sides of the `G` comparison (should be >= 0).
    pub step22: f64,
    /// Max over nodes of `1/mu_N - sum_i (x_i/s)^2 / mu_i` (should be <= 0).
    pub step20_pointwise: f64,
    /// Right minus left side of the integrated bound (informational).
    pub step20_gap: f64,
    /// Right minus left side of the per-test-function bound (informational).
    pub bound11_gaps: Vec<f64>,
    /// `|int Phi_i u_j| / |Phi_i|` for `j < i` (informational; only `j = 0`,
    /// the constants, is enforced by the balancing).
    pub orthogonality: Vec<Vec<f64>>,
    pub num_nodes: usize,
}

impl ProofReport {
    pub fn step21_holds(&self) -> bool {
        self.step21 <= QUADRATURE_SLACK * self.cap_g2_over_sin2
    }

    pub fn step22_holds(&self) -> bool {
        self.step22 >= -QUADRATURE_SLACK * self.cap_g2
    }

    pub fn step20_holds(&self) -> bool {
        self.step20_pointwise <= 1e-12
    }

    pub fn balanced(&self) -> bool {
        self.balancing_residual < BALANCE_TOL * self.balancing_scale
    }

    /// Both comparison steps are equalities (expected on geodesic balls).
    pub fn cap_equality(&self) -> bool {
        self.step21.abs() <= CAP_EQUALITY_TOL * self.cap_g2_over_sin2
            && self.step22.abs() <= CAP_EQUALITY_TOL * self.cap_g2
    }

    pub fn all_hold(&self) -> bool {
        self.step20_holds() && self.step21_holds() && self.step22_holds()
    }
}

#[derive(Debug, Clone)]
pub struct InequalityReport {
    pub dim: usize,
    pub kind: &'static str,
    /// `mu_1..mu_N` of the domain.
    pub eigenvalues: Vec<f64>,
    /// Exact-domain volume, used for `gamma`.
    pub domain_volume: f64,
    /// Volume of the finest mesh (diagnostic).
    pub mesh_volume: f64,
    pub equivalent_gamma: f64,
    pub mu1_cap: f64,
    pub lhs: f64,
    pub rhs: f64,
    pub margin: f64,
    pub tolerance: f64,
    pub mesh_h: f64,
    pub refinements: usize,
    pub num_dofs: usize,
    pub max_residual: f64,
    pub proof: Option<ProofReport>,
}

impl InequalityReport {
    pub fn passed(&self) -> bool {
        self.margin >= -self.tolerance
    }

    /// Harmonic-mean restatement: `(1/(N-1)) sum 1/mu_i` and `1/mu_1(D_gamma)`.
    pub fn harmonic_means(&self) -> (f64, f64) {
        (self.lhs / (self.dim - 1) as f64, 1.0 / self.mu1_cap)
    }

    pub fn to_key_values(&self) -> String {
        let mut s = String::new();
        let mut kv = |k: &str, v: String| writeln!(s, "{k} = {v}").unwrap();
        kv("kind", self.kind.to_string());
        kv("dim", self.dim.to_string());
        for (i, mu) in self.eigenvalues.iter().enumerate() {
            kv(&format!("mu_{}", i + 1), format!("{mu:.16e}"));
        }
        kv("domain_volume", format!("{:.16e}", self.domain_volume));
        kv("mesh_volume", format!("{:.16e}", self.mesh_volume));
        kv("equivalent_gamma", format!("{:.16e}", self.equivalent_gamma));
        kv("mu1_cap", format!("{:.16e}", self.mu1_cap));
        kv("lhs", format!("{:.16e}", self.lhs));
        kv("rhs", format!("{:.16e}", self.rhs));
        kv("margin", format!("{:.16e}", self.margin));
        kv("tolerance", format!("{:.16e}", self.tolerance));
        kv("mesh_h", format!("{:.16e}", self.mesh_h));
        kv("refinements", self.refinements.to_string());
        kv("num_dofs", self.num_dofs.to_string());
        kv("max_residual", format!("{:.16e}", self.max_residual));
        if let Some(p) = &self.proof {
            kv("balancing_residual", format!("{:.16e}", p.balancing_residual));
            kv("balancing_scale", format!("{:.16e}", p.balancing_scale));
            let (theta, az) = p.rotation.pole_angles();
            kv("pole_theta", format!("{theta:.16e}"));
            kv("pole_azimuth", format!("{az:.16e}"));
            kv("spin", format!("{:.16e}", p.rotation.beta));
            kv("step20_pointwise", format!("{:.16e}", p.step20_pointwise));
            kv("step20_gap", format!("{:.16e}", p.step20_gap));
            kv("step21", format!("{:.16e}", p.step21));
            kv("step22", format!("{:.16e}", p.step22));
            for (i, g) in p.bound11_gaps.iter().enumerate() {
                kv(&format!("bound11_gap_{}", i + 1), format!("{g:.16e}"));
            }
            let worst = p.orthogonality.iter().flatten().fold(0.0f64, |a, b| a.max(b.abs()));
            kv("orthogonality_max", format!("{worst:.16e}"));
            kv("proof_steps_hold", p.all_hold().to_string());
        }
        kv("passed", self.passed().to_string());
        s
    }
}

/// Volume of the exact domain by the verification quadrature.
pub fn exact_volume(spec: &DomainSpec) -> Result<f64> {
    let region = Region::new(spec)?;
    let rot = match spec.dim() {
        2 => Rotation::from_chart_pole(interior_chart_point(&region)?, 0.0),
        d => Rotation::identity(d),
    };
    Ok(region.nodes(&rot, None)?.iter().map(|n| n.w).sum())
}

fn interior_chart_point(region: &Region) -> Result<[f64; 2]> {
    if region.contains([0.0, 0.0]) {
        return Ok([0.0, 0.0]);
    }
    let n = 128;
    (0..n * n)
        .map(|k| [-1.0 + 2.0 * ((k % n) as f64 + 0.5) / n as f64, -1.0 + 2.0 * ((k / n) as f64 + 0.5) / n as f64])
        .find(|&x| region.contains(x))
        .ok_or_else(|| Error::Quadrature("no interior point found".into()))
}

/// Computes the spectrum, the equivalent cap and the margin of the
/// inequality; with `proof_steps`, also the proof-step record.
pub fn verify_domain(spec: &DomainSpec, opts: &VerifyOptions) -> Result<InequalityReport> {
    spec.validate()?;
    let dim = spec.dim();
    if !(opts.h.is_finite() && opts.h > 0.0) {
        return Err(Error::InvalidInput(format!("mesh size must be positive, got {}", opts.h)));
    }
    let domain_volume = exact_volume(spec)?;
    let gamma = equivalent_radius(dim, &SphereVolume::new(dim, domain_volume))?;
    let spectrum = domain_spectrum(spec, opts.h, opts.refinements, dim)?;
    let eigenvalues = spectrum.values();
    if eigenvalues.iter().any(|&m| !(m > 0.0)) {
        return Err(Error::InvalidInput(format!("non-positive eigenvalue in {eigenvalues:?}")));
    }
    let meshed = mesh_volume(&spectrum.mesh, spec).value;
    if (meshed - domain_volume).abs() > 1e-2 * domain_volume {
        // the polar rule sees only the part visible from its pole
        return Err(Error::Quadrature(format!(
            "exact volume {domain_volume} disagrees with the mesh volume {meshed}; domain is not star-shaped"
        )));
    }
    let cap = mu1_cap(dim, gamma)?;
    let lhs: f64 = eigenvalues[..dim - 1].iter().map(|m| 1.0 / m).sum();
    let rhs = (dim - 1) as f64 / cap.value;
    let mesh_h = opts.h / (1u64 << opts.refinements) as f64;
    let proof = if opts.proof_steps {
        let profile = cap_profile(dim, gamma)?;
        Some(check_proof_steps(spec, &profile, &spectrum)?)
    } else {
        None
    };
    Ok(InequalityReport {
        dim,
        kind: spec.kind().name(),
        domain_volume,
        mesh_volume: meshed,
        equivalent_gamma: gamma,
        mu1_cap: cap.value,
        lhs,
        rhs,
        margin: lhs - rhs,
        tolerance: margin_tolerance(mesh_h),
        mesh_h,
        refinements: opts.refinements,
        num_dofs: spectrum.num_dofs,
        max_residual: spectrum.max_residual(),
        eigenvalues,
        proof,
    })
}

/// `|S^{N-1}| int_0^gamma f(t) sin^{N-1} t dt`.
fn cap_integral(dim: usize, gamma: f64, f: impl Fn(f64) -> f64) -> f64 {
    let sphere = dim as f64 * unit_ball_volume(dim);
    let rule = GaussRule::new(16);
    let panels = 32;
    let mut total = 0.0;
    for k in 0..panels {
        let (a, b) = (gamma * k as f64 / panels as f64, gamma * (k + 1) as f64 / panels as f64);
        total += rule.integrate(a, b, |t| f(t) * t.sin().powi(dim as i32 - 1));
    }
    sphere * total
}

/// Balances the orientation, then evaluates the inequalities of the proof
/// with the computed spectrum.
pub fn check_proof_steps(
    spec: &DomainSpec,
    profile: &ExtendedProfile,
    spectrum: &DomainSpectrum,
) -> Result<ProofReport> {
    let dim = spec.dim();
    let mu = spectrum.values();
    if mu.len() < dim || profile.dim() != dim {
        return Err(Error::InvalidInput("proof steps need mu_1..mu_N and a matching profile".into()));
    }
    let region = Region::new(spec)?;
    let balancing = find_balancing_rotation(spec, profile)?;
    let eval = spectrum.evaluator();
    let located =
        |nodes: &[QuadNode]| -> Result<Vec<(usize, [f64; 3])>> { nodes.iter().map(|n| eval.locate(n.chart)).collect() };
    let phi = |n: &QuadNode, i: usize| -> f64 {
        let s = n.theta_p.sin();
        if s > 0.0 {
            profile.value(n.theta_p) * n.yr[i] / s
        } else {
            0.0
        }
    };
    let mut rotation = balancing.rotation.clone();
    let mut nodes = region.nodes(&rotation, Some(profile.gamma))?;
    let mut at = located(&nodes)?;
    if dim == 2 {
        // spin the tangent frame so that Phi_2 is orthogonal to u_1
        let (mut a, mut b) = (0.0, 0.0);
        for (n, &loc) in nodes.iter().zip(&at) {
            let u = eval.value(0, loc, n.psi);
            a += n.w * phi(n, 0) * u;
            b += n.w * phi(n, 1) * u;
        }
        rotation = rotation.with_beta(b.atan2(a));
        nodes = region.nodes(&rotation, Some(profile.gamma))?;
        at = located(&nodes)?;
    }

    let mut omega_g2 = 0.0;
    let mut omega_g2_over_sin2 = 0.0;
    let mut phi2 = vec![0.0; dim];
    let mut angular = vec![0.0; dim];
    // the trial function Phi_i must be orthogonal to u_1..u_{i-1}
    let mut cross: Vec<Vec<f64>> = (0..dim).map(|i| vec![0.0; i]).collect();
    let mut step20_pointwise = f64::NEG_INFINITY;
    for (n, &loc) in nodes.iter().zip(&at) {
        let g = profile.value(n.theta_p);
        let s = n.theta_p.sin();
        let g2s = if s > 0.0 { (g / s).powi(2) } else { 0.0 };
        omega_g2 += n.w * g * g;
        omega_g2_over_sin2 += n.w * g2s;
        let mut weighted = 0.0;
        for i in 0..dim {
            let ratio = if s > 0.0 { (n.yr[i] / s).powi(2) } else { 1.0 / dim as f64 };
            weighted += ratio / mu[i];
            let p = phi(n, i);
            phi2[i] += n.w * p * p;
            angular[i] += n.w * g2s * (1.0 - ratio);
            for (j, c) in cross[i].iter_mut().enumerate() {
                *c += n.w * p * eval.value(j, loc, n.psi);
            }
        }
        step20_pointwise = step20_pointwise.max(1.0 / mu[dim - 1] - weighted);
    }
    let gamma = profile.gamma;
    let cap_g2 = cap_integral(dim, gamma, |t| profile.value(t).powi(2));
    let cap_g2_over_sin2 = cap_integral(dim, gamma, |t| (profile.value(t) / t.sin()).powi(2));
    let cap_gprime2 = cap_integral(dim, gamma, |t| profile.eval(t).1.powi(2));
    let nf = dim as f64;
    let bound11_gaps = (0..dim).map(|i| cap_gprime2 / (nf * mu[i]) + angular[i] / mu[i] - phi2[i]).collect();
    let step20_rhs = mu.iter().take(dim).map(|m| 1.0 / m).sum::<f64>() * cap_gprime2 / nf
        + mu.iter().take(dim - 1).map(|m| 1.0 / m).sum::<f64>() * omega_g2_over_sin2;
    let orthogonality = cross.iter().zip(&phi2).map(|(row, p2)| row.iter().map(|c| c / p2.sqrt()).collect()).collect();
    Ok(ProofReport {
        rotation,
        balancing_residual: balancing.residual,
        balancing_scale: balancing.scale,
        omega_g2_over_sin2,
        cap_g2_over_sin2,
        omega_g2,
        cap_g2,
        cap_gprime2,
        step21: omega_g2_over_sin2 - cap_g2_over_sin2,
        step22: omega_g2 - cap_g2,
        step20_pointwise,
        step20_gap: step20_rhs - omega_g2,
        bound11_gaps,
        orthogonality,
        num_nodes: nodes.len(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn cap_report_is_an_equality() {
        let spec = DomainSpec::Cap { dim: 2, gamma: PI / 3.0 };
        let r = verify_domain(&spec, &VerifyOptions { h: 0.08, refinements: 1, proof_steps: true }).unwrap();
        assert!((r.equivalent_gamma - PI / 3.0).abs() < 1e-12);
        assert!(r.margin.abs() < 1e-3, "{}", r.margin);
        let p = r.proof.unwrap();
        assert!(p.cap_equality() && p.all_hold() && p.balanced(), "{p:?}");
    }

    #[test]
    fn oversized_domain_is_rejected() {
        let spec = DomainSpec::DiskRegion { center: [0.0, 0.0], radius: 1.2 };
        assert!(verify_domain(&spec, &VerifyOptions::default()).is_err());
    }
}
