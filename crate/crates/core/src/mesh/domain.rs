use std::f64::consts::PI;
use std::fmt::Write as _;

use super::boundary::{is_simple_polygon, signed_area, BoundaryCurve};
use crate::error::{Error, Result};
use crate::stereographic::HEMISPHERE_SLACK;

/// Largest admissible `sum |eps_j|` for a perturbed cap.
pub const MAX_PERTURBATION: f64 = 0.3;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DomainKind {
    Cap,
    DiskRegion,
    PolygonRegion,
    PerturbedCap,
    MeridianRegion,
}

impl DomainKind {
    pub fn name(self) -> &'static str {
        match self {
            DomainKind::Cap => "cap",
            DomainKind::DiskRegion => "disk_region",
            DomainKind::PolygonRegion => "polygon_region",
            DomainKind::PerturbedCap => "perturbed_cap",
            DomainKind::MeridianRegion => "meridian_region",
        }
    }
}

/// A domain on S² (given in the stereographic chart) or an axisymmetric
/// domain on S³ (given by its meridian cross-section in `(theta, phi)`).
#[derive(Debug, Clone, PartialEq)]
pub enum DomainSpec {
    Cap { dim: usize, gamma: f64 },
    DiskRegion { center: [f64; 2], radius: f64 },
    PolygonRegion { vertices: Vec<[f64; 2]> },
    PerturbedCap { gamma: f64, amplitudes: Vec<(u32, f64)> },
    MeridianRegion { vertices: Vec<[f64; 2]> },
}

impl DomainSpec {
    pub fn kind(&self) -> DomainKind {
        match self {
            DomainSpec::Cap { .. } => DomainKind::Cap,
            DomainSpec::DiskRegion { .. } => DomainKind::DiskRegion,
            DomainSpec::PolygonRegion { .. } => DomainKind::PolygonRegion,
            DomainSpec::PerturbedCap { .. } => DomainKind::PerturbedCap,
            DomainSpec::MeridianRegion { .. } => DomainKind::MeridianRegion,
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            DomainSpec::Cap { dim, .. } => *dim,
            DomainSpec::MeridianRegion { .. } => 3,
            _ => 2,
        }
    }

    /// Geodesic balls, for which the inequality is an equality.
    pub fn is_geodesic_ball(&self) -> bool {
        match self {
            DomainSpec::Cap { .. } | DomainSpec::DiskRegion { .. } => true,
            DomainSpec::PerturbedCap { amplitudes, .. } => amplitudes.iter().all(|a| a.1 == 0.0),
            _ => false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidInput(m));
        match self {
            DomainSpec::Cap { dim, gamma } => {
                if !(2..=3).contains(dim) {
                    return bad(format!("meshable caps need dim 2 or 3, got {dim}"));
                }
                check_gamma(*gamma)
            }
            DomainSpec::DiskRegion { center, radius } => {
                if !(radius.is_finite() && *radius > 0.0) || !center.iter().all(|c| c.is_finite()) {
                    return bad("disk radius must be positive and finite".into());
                }
                if center[0].hypot(center[1]) + radius > 1.0 + HEMISPHERE_SLACK {
                    return Err(Error::HemisphereViolation("disk leaves the unit chart disk".into()));
                }
                Ok(())
            }
            DomainSpec::PolygonRegion { vertices } => {
                check_polygon(vertices)?;
                if vertices.iter().any(|v| v[0].hypot(v[1]) > 1.0 + HEMISPHERE_SLACK) {
                    return Err(Error::HemisphereViolation("polygon vertex outside the unit chart disk".into()));
                }
                Ok(())
            }
            DomainSpec::PerturbedCap { gamma, amplitudes } => {
                check_gamma(*gamma)?;
                let total: f64 = amplitudes.iter().map(|a| a.1.abs()).sum();
                if amplitudes.iter().any(|a| a.0 == 0 || !a.1.is_finite()) {
                    return bad("perturbation modes must be j >= 1 with finite amplitude".into());
                }
                if total >= MAX_PERTURBATION {
                    return bad(format!("sum of |eps_j| = {total} must stay below {MAX_PERTURBATION}"));
                }
                let curve = self.boundary_curve();
                let max_r = (0..4096).map(|k| curve.radius_at(2.0 * PI * k as f64 / 4096.0)).fold(0.0f64, f64::max);
                if max_r > 1.0 + HEMISPHERE_SLACK {
                    return Err(Error::HemisphereViolation(format!("perturbed boundary reaches chart radius {max_r}")));
                }
                Ok(())
            }
            DomainSpec::MeridianRegion { vertices } => {
                check_polygon(vertices)?;
                let eps = 1e-12;
                if vertices.iter().any(|v| v[0] < -eps || v[0] > PI / 2.0 + eps || v[1] < -eps || v[1] > PI + eps) {
                    return Err(Error::HemisphereViolation(
                        "meridian region must lie in 0 <= theta <= pi/2, 0 <= phi <= pi".into(),
                    ));
                }
                Ok(())
            }
        }
    }

    /// Boundary of the meshed planar region: the chart image for S², the
    /// meridian section for S³.
    pub fn boundary_curve(&self) -> BoundaryCurve {
        match self {
            DomainSpec::Cap { dim: 3, gamma } => {
                BoundaryCurve::Polyline(vec![[0.0, 0.0], [*gamma, 0.0], [*gamma, PI], [0.0, PI]])
            }
            DomainSpec::Cap { gamma, .. } => BoundaryCurve::Circle { center: [0.0, 0.0], radius: (gamma / 2.0).tan() },
            DomainSpec::DiskRegion { center, radius } => BoundaryCurve::Circle { center: *center, radius: *radius },
            DomainSpec::PerturbedCap { gamma, amplitudes } => {
                BoundaryCurve::Radial { center: [0.0, 0.0], base: (gamma / 2.0).tan(), amplitudes: amplitudes.clone() }
            }
            DomainSpec::PolygonRegion { vertices } | DomainSpec::MeridianRegion { vertices } => {
                let mut v = vertices.clone();
                if signed_area(&v) < 0.0 {
                    v.reverse();
                }
                BoundaryCurve::Polyline(v)
            }
        }
    }

    /// Parses the `key = value` domain file format.
    pub fn parse(text: &str) -> Result<Self> {
        let mut entries: Vec<(usize, String, String)> = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let Some((k, v)) = line.split_once('=') else {
                return Err(Error::Parse { line: i + 1, message: format!("expected `key = value`, got `{line}`") });
            };
            entries.push((i + 1, k.trim().to_ascii_lowercase(), v.trim().to_string()));
        }
        let get = |key: &str| entries.iter().find(|e| e.1 == key);
        let real = |key: &str| -> Result<f64> {
            let (line, _, v) = get(key).ok_or_else(|| Error::Parse { line: 0, message: format!("missing `{key}`") })?;
            parse_real(v).ok_or_else(|| Error::Parse { line: *line, message: format!("bad number `{v}`") })
        };
        let points = |key: &str| -> Result<Vec<[f64; 2]>> {
            let (line, _, v) = get(key).ok_or_else(|| Error::Parse { line: 0, message: format!("missing `{key}`") })?;
            v.split(';')
                .filter(|p| !p.trim().is_empty())
                .map(|p| {
                    let xs: Vec<Option<f64>> = p.split_whitespace().map(parse_real).collect();
                    match xs.as_slice() {
                        [Some(x), Some(y)] => Ok([*x, *y]),
                        _ => Err(Error::Parse { line: *line, message: format!("bad point `{}`", p.trim()) }),
                    }
                })
                .collect()
        };
        let kind = get("kind").ok_or_else(|| Error::Parse { line: 0, message: "missing `kind`".into() })?;
        let spec = match kind.2.as_str() {
            "cap" => {
                let dim = match get("dim") {
                    Some((line, _, v)) => v
                        .parse::<usize>()
                        .map_err(|_| Error::Parse { line: *line, message: format!("bad dim `{v}`") })?,
                    None => 2,
                };
                DomainSpec::Cap { dim, gamma: real("gamma")? }
            }
            "disk_region" => DomainSpec::DiskRegion { center: [real("cx")?, real("cy")?], radius: real("radius")? },
            "polygon_region" => DomainSpec::PolygonRegion { vertices: points("vertices")? },
            "meridian_region" => DomainSpec::MeridianRegion { vertices: points("vertices")? },
            "perturbed_cap" => {
                let mut amplitudes = Vec::new();
                for (line, k, v) in &entries {
                    if let Some(j) = k.strip_prefix("eps") {
                        let j = j
                            .parse::<u32>()
                            .map_err(|_| Error::Parse { line: *line, message: format!("bad key `{k}`") })?;
                        let e = parse_real(v)
                            .ok_or_else(|| Error::Parse { line: *line, message: format!("bad number `{v}`") })?;
                        amplitudes.push((j, e));
                    }
                }
                amplitudes.sort_by_key(|a| a.0);
                DomainSpec::PerturbedCap { gamma: real("gamma")?, amplitudes }
            }
            other => return Err(Error::Parse { line: kind.0, message: format!("unknown domain kind `{other}`") }),
        };
        if let Some((line, _, v)) = get("dim") {
            if v.parse::<usize>().ok() != Some(spec.dim()) {
                return Err(Error::Parse { line: *line, message: format!("dim {v} does not match kind {}", kind.2) });
            }
        }
        spec.validate()?;
        Ok(spec)
    }

    /// Inverse of [`DomainSpec::parse`].
    pub fn to_text(&self) -> String {
        let mut s = format!("kind = {}\ndim = {}\n", self.kind().name(), self.dim());
        let pts = |v: &[[f64; 2]]| v.iter().map(|p| format!("{:e} {:e}", p[0], p[1])).collect::<Vec<_>>().join("; ");
        match self {
            DomainSpec::Cap { gamma, .. } => writeln!(s, "gamma = {gamma:e}").unwrap(),
            DomainSpec::DiskRegion { center, radius } => {
                writeln!(s, "cx = {:e}\ncy = {:e}\nradius = {radius:e}", center[0], center[1]).unwrap()
            }
            DomainSpec::PolygonRegion { vertices } | DomainSpec::MeridianRegion { vertices } => {
                writeln!(s, "vertices = {}", pts(vertices)).unwrap()
            }
            DomainSpec::PerturbedCap { gamma, amplitudes } => {
                writeln!(s, "gamma = {gamma:e}").unwrap();
                for (j, e) in amplitudes {
                    writeln!(s, "eps{j} = {e:e}").unwrap();
                }
            }
        }
        s
    }
}

fn check_gamma(gamma: f64) -> Result<()> {
    if !(gamma.is_finite() && gamma > 0.0) {
        return Err(Error::InvalidInput(format!("cap radius must be positive, got {gamma}")));
    }
    if gamma > PI / 2.0 + HEMISPHERE_SLACK {
        return Err(Error::HemisphereViolation(format!("cap radius {gamma} exceeds pi/2")));
    }
    Ok(())
}

fn check_polygon(v: &[[f64; 2]]) -> Result<()> {
    if v.len() < 3 || v.iter().any(|p| !p[0].is_finite() || !p[1].is_finite()) {
        return Err(Error::InvalidInput("polygon needs at least three finite vertices".into()));
    }
    if signed_area(v).abs() < 1e-14 {
        return Err(Error::InvalidInput("degenerate zero-area region".into()));
    }
    if !is_simple_polygon(v) {
        return Err(Error::InvalidInput("self-intersecting boundary".into()));
    }
    Ok(())
}

/// Accepts plain decimals and multiples of pi such as `pi/3`, `5*pi/12`, `0.5pi`.
pub fn parse_real(text: &str) -> Option<f64> {
    let t = text.trim().to_ascii_lowercase();
    if let Ok(x) = t.parse::<f64>() {
        return Some(x);
    }
    let (num, den) = match t.split_once('/') {
        Some((n, d)) => (n.trim(), d.trim().parse::<f64>().ok()?),
        None => (t.as_str(), 1.0),
    };
    let coeff = num.strip_suffix("pi")?.trim().trim_end_matches('*').trim();
    let c = match coeff {
        "" => 1.0,
        "-" => -1.0,
        c => c.parse::<f64>().ok()?,
    };
    Some(c * PI / den)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_pi_multiples() {
        assert_eq!(parse_real("pi/3"), Some(PI / 3.0));
        assert_eq!(parse_real("5*pi/12"), Some(5.0 * PI / 12.0));
        assert_eq!(parse_real("0.25"), Some(0.25));
        assert_eq!(parse_real("nope"), None);
    }

    #[test]
    fn text_round_trip() {
        let specs = [
            DomainSpec::Cap { dim: 3, gamma: 0.7 },
            DomainSpec::DiskRegion { center: [0.1, -0.2], radius: 0.3 },
            DomainSpec::PerturbedCap { gamma: 1.0, amplitudes: vec![(2, 0.1), (3, -0.05)] },
            DomainSpec::PolygonRegion { vertices: vec![[0.0, 0.0], [0.5, 0.0], [0.0, 0.5]] },
        ];
        for s in specs {
            assert_eq!(DomainSpec::parse(&s.to_text()).unwrap(), s);
        }
    }

    #[test]
    fn rejects_bad_domains() {
        let outside = DomainSpec::PolygonRegion { vertices: vec![[0.0, 0.0], [1.5, 0.0], [0.0, 0.5]] };
        assert!(matches!(outside.validate(), Err(Error::HemisphereViolation(_))));
        let flat = DomainSpec::MeridianRegion { vertices: vec![[0.0, 0.0], [0.5, 0.5], [1.0, 1.0]] };
        assert!(matches!(flat.validate(), Err(Error::InvalidInput(_))));
        let big = DomainSpec::PerturbedCap { gamma: 1.0, amplitudes: vec![(2, 0.2), (3, 0.15)] };
        assert!(big.validate().is_err());
        assert!(DomainSpec::parse("kind = blob").is_err());
    }
}
