//! Fixed set of domains exercising the verifier: caps, perturbed caps,
//! offset disks, a triangle, and S³ domains of revolution.

use std::f64::consts::PI;

use crate::mesh::DomainSpec;

/// What the inequality should look like on a corpus domain.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Expectation {
    /// Geodesic ball: margin zero up to discretization.
    Equality,
    /// Not a geodesic ball: strictly positive margin.
    Strict,
}

#[derive(Debug, Clone)]
pub struct CorpusEntry {
    pub name: String,
    pub spec: DomainSpec,
    pub expect: Expectation,
}

/// Meridian polygon of `0 <= theta <= f(phi)` sampled at `samples + 1` angles.
pub fn revolution_region(f: impl Fn(f64) -> f64, samples: usize) -> DomainSpec {
    let mut vertices = vec![[0.0, 0.0]];
    vertices.extend((0..=samples).map(|k| {
        let phi = PI * k as f64 / samples as f64;
        [f(phi), phi]
    }));
    vertices.push([0.0, PI]);
    DomainSpec::MeridianRegion { vertices }
}

pub fn corpus() -> Vec<CorpusEntry> {
    let mut out = Vec::new();
    let mut add = |name: String, spec: DomainSpec, expect| out.push(CorpusEntry { name, spec, expect });
    for (label, gamma) in
        [("pi/6", PI / 6.0), ("pi/4", PI / 4.0), ("pi/3", PI / 3.0), ("5pi/12", 5.0 * PI / 12.0), ("pi/2", PI / 2.0)]
    {
        add(format!("s2 cap {label}"), DomainSpec::Cap { dim: 2, gamma }, Expectation::Equality);
    }
    let perturbed: [&[(u32, f64)]; 6] =
        [&[(2, 0.15)], &[(2, 0.08)], &[(2, 0.04)], &[(3, 0.1)], &[(4, 0.08)], &[(2, 0.1), (3, 0.05)]];
    for amps in perturbed {
        let label: Vec<String> = amps.iter().map(|(j, e)| format!("eps{j}={e}")).collect();
        add(
            format!("perturbed cap {}", label.join(" ")),
            DomainSpec::PerturbedCap { gamma: PI / 3.0, amplitudes: amps.to_vec() },
            Expectation::Strict,
        );
    }
    // chart disks are geodesic caps, just not centred at the pole
    for (cx, cy, r) in [(0.3, 0.0, 0.4), (0.0, -0.25, 0.5), (0.2, 0.2, 0.3)] {
        add(
            format!("offset disk ({cx}, {cy}) r={r}"),
            DomainSpec::DiskRegion { center: [cx, cy], radius: r },
            Expectation::Equality,
        );
    }
    let tri = (0..3)
        .map(|k| {
            let a = PI / 2.0 + 2.0 * PI * k as f64 / 3.0;
            [0.6 * a.cos(), 0.6 * a.sin()]
        })
        .collect();
    add("triangle r=0.6".into(), DomainSpec::PolygonRegion { vertices: tri }, Expectation::Strict);
    for (label, gamma) in [("pi/4", PI / 4.0), ("pi/3", PI / 3.0)] {
        add(format!("s3 cap {label}"), DomainSpec::Cap { dim: 3, gamma }, Expectation::Equality);
    }
    add(
        "s3 barrel 0.9(1+0.2sin^2)".into(),
        revolution_region(|p| 0.9 * (1.0 + 0.2 * p.sin().powi(2)), 64),
        Expectation::Strict,
    );
    add(
        "s3 barrel 1.0(1-0.15sin^2)".into(),
        revolution_region(|p| 1.0 - 0.15 * p.sin().powi(2), 64),
        Expectation::Strict,
    );
    add(
        "s3 barrel 0.8(1+0.1cos+0.15sin^2)".into(),
        revolution_region(|p| 0.8 * (1.0 + 0.1 * p.cos() + 0.15 * p.sin().powi(2)), 64),
        Expectation::Strict,
    );
    out
}
