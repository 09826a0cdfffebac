//! P1 triangulations of stereographic chart domains (S²) and meridian
//! cross-sections of axisymmetric domains (S³).

mod boundary;
mod delaunay;
mod domain;

use std::collections::{HashMap, HashSet};
use std::f64::consts::PI;
use std::fmt::Write as _;

pub use boundary::{point_in_polygon, segment_distance, signed_area, BoundaryCurve};
pub use domain::{parse_real, DomainKind, DomainSpec, MAX_PERTURBATION};

use crate::error::{Error, Result};
use crate::quadrature::{TriangleRule, MID_EDGE, RADON7};
use crate::stereographic::{conformal_factor, SphereVolume};

/// Angle bound requested from the quality refinement (degrees).
pub const MIN_ANGLE_DEG: f64 = 20.5;

/// Angle bound guaranteed by the mesh checks (degrees).
pub const GUARANTEED_ANGLE_DEG: f64 = 20.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MeshGeometry {
    /// Stereographic chart of S²; weight `p(|x|)²`.
    Chart,
    /// Meridian `(theta, phi)` of an axisymmetric S³ domain.
    Meridian,
}

#[derive(Debug, Clone)]
pub struct TriangleMesh {
    pub vertices: Vec<[f64; 2]>,
    pub triangles: Vec<[usize; 3]>,
    pub boundary_edges: Vec<[usize; 2]>,
    pub h: f64,
    pub geometry: MeshGeometry,
    pub curve: BoundaryCurve,
}

#[derive(Debug, Clone, Copy)]
pub struct MeshQuality {
    pub min_angle_deg: f64,
    pub max_edge: f64,
    pub min_area: f64,
}

impl TriangleMesh {
    pub fn num_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn num_triangles(&self) -> usize {
        self.triangles.len()
    }

    pub fn corners(&self, t: usize) -> [[f64; 2]; 3] {
        self.triangles[t].map(|v| self.vertices[v])
    }

    pub fn area(&self, t: usize) -> f64 {
        let [a, b, c] = self.corners(t);
        0.5 * ((b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0]))
    }

    pub fn quality(&self) -> MeshQuality {
        let mut q = MeshQuality { min_angle_deg: 180.0, max_edge: 0.0, min_area: f64::INFINITY };
        for t in 0..self.triangles.len() {
            let [a, b, c] = self.corners(t);
            let (ang, edge) = delaunay::triangle_shape(a, b, c);
            q.min_angle_deg = q.min_angle_deg.min(ang.to_degrees());
            q.max_edge = q.max_edge.max(edge);
            q.min_area = q.min_area.min(self.area(t));
        }
        q
    }

    /// Checks orientation, conformity, and closed boundary loops.
    pub fn check(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidMesh(m));
        if let Some(t) = (0..self.triangles.len()).find(|&t| self.area(t) <= 0.0) {
            return bad(format!("triangle {t} is not positively oriented"));
        }
        let mut directed = HashMap::new();
        for tri in &self.triangles {
            for i in 0..3 {
                if tri.iter().any(|&v| v >= self.vertices.len()) {
                    return bad("triangle references a missing vertex".into());
                }
                if directed.insert((tri[i], tri[(i + 1) % 3]), ()).is_some() {
                    return bad(format!("edge {:?} used twice in the same direction", (tri[i], tri[(i + 1) % 3])));
                }
            }
        }
        let boundary: HashSet<(usize, usize)> =
            directed.keys().filter(|&&(a, b)| !directed.contains_key(&(b, a))).copied().collect();
        let listed: HashSet<(usize, usize)> = self.boundary_edges.iter().map(|e| (e[0], e[1])).collect();
        if boundary != listed {
            return bad("boundary edge list does not match the triangulation".into());
        }
        // Hanging nodes would show up as boundary vertices off the curve or
        // with unbalanced in/out degree.
        let mut degree: HashMap<usize, i64> = HashMap::new();
        for &(a, b) in &boundary {
            *degree.entry(a).or_default() += 1;
            *degree.entry(b).or_default() -= 1;
        }
        if degree.values().any(|&d| d != 0) {
            return bad("boundary edges do not form closed loops".into());
        }
        let used: HashSet<usize> = self.triangles.iter().flatten().copied().collect();
        if used.len() != self.vertices.len() {
            return bad("mesh has unused vertices".into());
        }
        Ok(())
    }

    pub fn boundary_vertices(&self) -> Vec<bool> {
        let mut on = vec![false; self.vertices.len()];
        for e in &self.boundary_edges {
            on[e[0]] = true;
            on[e[1]] = true;
        }
        on
    }

    /// Plain-text export: `mesh nv nt nb`, then `v`, `t` and `b` lines.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        writeln!(s, "mesh {} {} {}", self.vertices.len(), self.triangles.len(), self.boundary_edges.len()).unwrap();
        for v in &self.vertices {
            writeln!(s, "v {:.16e} {:.16e}", v[0], v[1]).unwrap();
        }
        for t in &self.triangles {
            writeln!(s, "t {} {} {}", t[0], t[1], t[2]).unwrap();
        }
        for b in &self.boundary_edges {
            writeln!(s, "b {} {}", b[0], b[1]).unwrap();
        }
        s
    }

    /// Quadrature rule used for weighted integrals on triangle `t`.
    pub fn rule(&self) -> TriangleRule {
        match self.geometry {
            MeshGeometry::Chart => MID_EDGE,
            MeshGeometry::Meridian => RADON7,
        }
    }
}

/// Parses the vertex/triangle/boundary sections of an exported mesh.
pub fn parse_mesh_text(text: &str) -> Result<(Vec<[f64; 2]>, Vec<[usize; 3]>, Vec<[usize; 2]>)> {
    let mut v = Vec::new();
    let mut t = Vec::new();
    let mut b = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let err = || Error::Parse { line: i + 1, message: format!("bad mesh line `{line}`") };
        let mut it = line.split_whitespace();
        match it.next() {
            Some("mesh") | None => {}
            Some("v") => {
                let x: Vec<f64> = it.map(|w| w.parse().map_err(|_| err())).collect::<Result<_>>()?;
                v.push(<[f64; 2]>::try_from(x).map_err(|_| err())?);
            }
            Some("t") => {
                let x: Vec<usize> = it.map(|w| w.parse().map_err(|_| err())).collect::<Result<_>>()?;
                t.push(<[usize; 3]>::try_from(x).map_err(|_| err())?);
            }
            Some("b") => {
                let x: Vec<usize> = it.map(|w| w.parse().map_err(|_| err())).collect::<Result<_>>()?;
                b.push(<[usize; 2]>::try_from(x).map_err(|_| err())?);
            }
            Some(_) => return Err(err()),
        }
    }
    Ok((v, t, b))
}

fn build(spec: &DomainSpec, h: f64, geometry: MeshGeometry) -> Result<TriangleMesh> {
    if !(h.is_finite() && h > 0.0) {
        return Err(Error::InvalidInput(format!("mesh size must be positive, got {h}")));
    }
    spec.validate()?;
    let curve = spec.boundary_curve();
    let raw = delaunay::mesh_region(
        &curve,
        &delaunay::MeshOptions { h, min_angle_deg: MIN_ANGLE_DEG, max_points: 4_000_000 },
    )?;
    let mut mesh =
        TriangleMesh { vertices: raw.points, triangles: raw.triangles, boundary_edges: Vec::new(), h, geometry, curve };
    mesh.boundary_edges = boundary_edges_of(&mesh.triangles);
    mesh.check()?;
    Ok(mesh)
}

fn boundary_edges_of(triangles: &[[usize; 3]]) -> Vec<[usize; 2]> {
    let directed: HashSet<(usize, usize)> =
        triangles.iter().flat_map(|t| (0..3).map(move |i| (t[i], t[(i + 1) % 3]))).collect();
    let mut out: Vec<[usize; 2]> =
        directed.iter().filter(|&&(a, b)| !directed.contains(&(b, a))).map(|&(a, b)| [a, b]).collect();
    out.sort_unstable();
    out
}

/// Triangulates the chart image of an S² domain.
pub fn build_planar_mesh(spec: &DomainSpec, h: f64) -> Result<TriangleMesh> {
    if spec.dim() != 2 {
        return Err(Error::InvalidInput("planar meshes are for dim 2 domains".into()));
    }
    build(spec, h, MeshGeometry::Chart)
}

/// Triangulates the `(theta, phi)` meridian section of an S³ domain.
pub fn build_meridian_mesh(spec: &DomainSpec, h: f64) -> Result<TriangleMesh> {
    if spec.dim() != 3 {
        return Err(Error::InvalidInput("meridian meshes are for dim 3 domains".into()));
    }
    build(spec, h, MeshGeometry::Meridian)
}

/// Weight of the volume form at a mesh point (without the `2 pi` azimuthal factor).
pub fn volume_weight(geometry: MeshGeometry, x: [f64; 2]) -> f64 {
    match geometry {
        MeshGeometry::Chart => conformal_factor(x[0].hypot(x[1])).powi(2),
        MeshGeometry::Meridian => x[0].sin().powi(2) * x[1].sin(),
    }
}

/// Spherical volume of the meshed domain.
pub fn mesh_volume(mesh: &TriangleMesh, spec: &DomainSpec) -> SphereVolume {
    let rule = mesh.rule();
    let mut total = 0.0;
    for t in 0..mesh.triangles.len() {
        let [a, b, c] = mesh.corners(t);
        total += rule.on(a, b, c).map(|(x, _, w)| w * volume_weight(mesh.geometry, x)).sum::<f64>();
    }
    if mesh.geometry == MeshGeometry::Meridian {
        total *= 2.0 * PI;
    }
    SphereVolume::new(spec.dim(), total)
}

/// Uniform red refinement with boundary midpoints moved onto the exact curve.
pub fn refine(mesh: &TriangleMesh) -> TriangleMesh {
    let mut vertices = mesh.vertices.clone();
    let boundary: HashSet<(usize, usize)> = mesh.boundary_edges.iter().map(|e| (e[0], e[1])).collect();
    let mut mid: HashMap<(usize, usize), usize> = HashMap::new();
    let mut midpoint = |a: usize, b: usize, vertices: &mut Vec<[f64; 2]>| -> usize {
        let key = (a.min(b), a.max(b));
        *mid.entry(key).or_insert_with(|| {
            let (pa, pb) = (vertices[a], vertices[b]);
            let p = if boundary.contains(&(a, b)) || boundary.contains(&(b, a)) {
                mesh.curve.project_midpoint(pa, pb)
            } else {
                [0.5 * (pa[0] + pb[0]), 0.5 * (pa[1] + pb[1])]
            };
            vertices.push(p);
            vertices.len() - 1
        })
    };
    let mut triangles = Vec::with_capacity(4 * mesh.triangles.len());
    for &[a, b, c] in &mesh.triangles {
        let ab = midpoint(a, b, &mut vertices);
        let bc = midpoint(b, c, &mut vertices);
        let ca = midpoint(c, a, &mut vertices);
        triangles.extend([[a, ab, ca], [ab, b, bc], [ca, bc, c], [ab, bc, ca]]);
    }
    let mut boundary_edges = Vec::with_capacity(2 * mesh.boundary_edges.len());
    for &[a, b] in &mesh.boundary_edges {
        let m = mid[&(a.min(b), a.max(b))];
        boundary_edges.extend([[a, m], [m, b]]);
    }
    boundary_edges.sort_unstable();
    TriangleMesh {
        vertices,
        triangles,
        boundary_edges,
        h: 0.5 * mesh.h,
        geometry: mesh.geometry,
        curve: mesh.curve.clone(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stereographic::cap_volume;

    fn assert_valid(mesh: &TriangleMesh) {
        mesh.check().unwrap();
        let q = mesh.quality();
        assert!(q.min_angle_deg >= GUARANTEED_ANGLE_DEG, "min angle {}", q.min_angle_deg);
        assert!(q.max_edge <= mesh.h * (1.0 + 1e-9), "max edge {} > {}", q.max_edge, mesh.h);
    }

    #[test]
    fn hemisphere_chart_mesh() {
        let spec = DomainSpec::Cap { dim: 2, gamma: PI / 2.0 };
        let mesh = build_planar_mesh(&spec, 0.1).unwrap();
        assert_valid(&mesh);
        for &[a, _] in &mesh.boundary_edges {
            let v = mesh.vertices[a];
            assert!((v[0].hypot(v[1]) - 1.0).abs() < 1e-12);
        }
        let vol = mesh_volume(&build_planar_mesh(&spec, 0.05).unwrap(), &spec).value;
        assert!((vol - 2.0 * PI).abs() < 1e-3, "{vol}");
    }

    #[test]
    fn cap_volume_from_mesh() {
        let spec = DomainSpec::Cap { dim: 2, gamma: PI / 3.0 };
        let mesh = build_planar_mesh(&spec, 0.05).unwrap();
        assert_valid(&mesh);
        let vol = mesh_volume(&mesh, &spec).value;
        assert!((vol - PI).abs() < 1e-3, "{vol}");
    }

    #[test]
    fn meridian_cap_is_rectangle() {
        let spec = DomainSpec::Cap { dim: 3, gamma: PI / 2.0 };
        let mesh = build_meridian_mesh(&spec, 0.1).unwrap();
        assert_valid(&mesh);
        let area: f64 = (0..mesh.num_triangles()).map(|t| mesh.area(t)).sum();
        assert!((area - PI * PI / 2.0).abs() < 1e-12);
        let vol = mesh_volume(&mesh, &spec).value;
        assert!((vol - PI * PI).abs() < 1e-2, "{vol}");
        let exact = cap_volume(3, PI / 3.0).unwrap().value;
        let s = DomainSpec::Cap { dim: 3, gamma: PI / 3.0 };
        let v = mesh_volume(&build_meridian_mesh(&s, 0.1).unwrap(), &s).value;
        assert!((v - exact).abs() < 1e-3);
    }

    #[test]
    fn refinement_quadruples_and_converges() {
        let spec = DomainSpec::Cap { dim: 2, gamma: PI / 3.0 };
        let coarse = build_planar_mesh(&spec, 0.1).unwrap();
        let fine = refine(&coarse);
        assert_eq!(fine.num_triangles(), 4 * coarse.num_triangles());
        assert_eq!(fine.h, 0.05);
        assert_valid(&fine);
        let e0 = (mesh_volume(&coarse, &spec).value - PI).abs();
        let e1 = (mesh_volume(&fine, &spec).value - PI).abs();
        let ratio = e0 / e1;
        assert!(ratio > 3.0 && ratio < 5.5, "ratio {ratio}");
    }

    #[test]
    fn polygon_and_perturbed_meshes() {
        let tri = DomainSpec::PolygonRegion {
            vertices: (0..3)
                .map(|k| {
                    let a = PI / 2.0 + 2.0 * PI * k as f64 / 3.0;
                    [0.6 * a.cos(), 0.6 * a.sin()]
                })
                .collect(),
        };
        assert_valid(&build_planar_mesh(&tri, 0.05).unwrap());
        let pc = DomainSpec::PerturbedCap { gamma: PI / 3.0, amplitudes: vec![(2, 0.15)] };
        assert_valid(&build_planar_mesh(&pc, 0.05).unwrap());
    }

    #[test]
    fn export_round_trip() {
        let spec = DomainSpec::Cap { dim: 2, gamma: 1.0 };
        let mesh = build_planar_mesh(&spec, 0.2).unwrap();
        let (v, t, b) = parse_mesh_text(&mesh.to_text()).unwrap();
        assert_eq!(v, mesh.vertices);
        assert_eq!(t, mesh.triangles);
        assert_eq!(b, mesh.boundary_edges);
    }
}
