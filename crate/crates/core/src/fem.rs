//! Weighted P1 weak forms of the Neumann eigenproblem: the conformal S²
//! form in the stereographic chart and the per-mode axisymmetric S³ form.

use std::f64::consts::PI;

use crate::eigen::{
    deflate_constants, dense_generalized, estimate_shift, lanczos_shift_invert, EigenPairs, LanczosOptions,
    SparseSymmetric,
};
use crate::error::{Error, Result};
use crate::mesh::{volume_weight, MeshGeometry, TriangleMesh};

/// Triangles with smaller area are rejected as degenerate.
pub const MIN_TRIANGLE_AREA: f64 = 1e-14;

/// Vertices this close to `phi = 0` or `phi = pi` lie on the rotation axis.
pub const AXIS_TOL: f64 = 1e-12;

#[derive(Debug, Clone)]
pub struct AssembledSystem {
    pub stiffness: SparseSymmetric,
    pub mass: SparseSymmetric,
    /// Number of unknowns.
    pub n: usize,
    /// Azimuthal mode for axisymmetric S³ systems.
    pub mode_m: Option<usize>,
    /// Mesh vertex of each unknown; axis vertices carry no unknown for m ≥ 1.
    pub dofs: Vec<usize>,
    pub num_vertices: usize,
}

impl AssembledSystem {
    /// True when constants lie in the kernel of K.
    pub fn is_neumann(&self) -> bool {
        matches!(self.mode_m, None | Some(0))
    }

    /// Values at every mesh vertex (zero where no unknown lives).
    pub fn expand(&self, x: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.num_vertices];
        for (&v, &xi) in self.dofs.iter().zip(x) {
            out[v] = xi;
        }
        out
    }
}

fn gradients(c: [[f64; 2]; 3], area: f64) -> [[f64; 2]; 3] {
    let g = |i: usize| {
        let (j, k) = ((i + 1) % 3, (i + 2) % 3);
        [(c[j][1] - c[k][1]) / (2.0 * area), (c[k][0] - c[j][0]) / (2.0 * area)]
    };
    [g(0), g(1), g(2)]
}

struct ElementTerms<'a> {
    /// Weights `(a_x, a_y)` of the two gradient components at a point.
    stiffness: &'a dyn Fn([f64; 2]) -> [f64; 2],
    potential: Option<&'a dyn Fn([f64; 2]) -> f64>,
    mass: &'a dyn Fn([f64; 2]) -> f64,
}

fn assemble(
    mesh: &TriangleMesh,
    terms: &ElementTerms<'_>,
    keep: &[bool],
    mode_m: Option<usize>,
) -> Result<AssembledSystem> {
    let mut index = vec![usize::MAX; mesh.num_vertices()];
    let mut dofs = Vec::new();
    for v in 0..mesh.num_vertices() {
        if keep[v] {
            index[v] = dofs.len();
            dofs.push(v);
        }
    }
    let rule = mesh.rule();
    let mut k_trip = Vec::with_capacity(6 * mesh.num_triangles());
    let mut m_trip = Vec::with_capacity(6 * mesh.num_triangles());
    for t in 0..mesh.num_triangles() {
        let area = mesh.area(t);
        if area < MIN_TRIANGLE_AREA {
            return Err(Error::InvalidMesh(format!("degenerate triangle {t} with area {area:e}")));
        }
        let c = mesh.corners(t);
        let g = gradients(c, area);
        let mut ke = [[0.0; 3]; 3];
        let mut me = [[0.0; 3]; 3];
        for (x, lam, w) in rule.on(c[0], c[1], c[2]) {
            let a = (terms.stiffness)(x);
            let q = terms.potential.map_or(0.0, |p| p(x));
            let rho = (terms.mass)(x);
            for i in 0..3 {
                for j in 0..=i {
                    ke[i][j] += w * (a[0] * g[i][0] * g[j][0] + a[1] * g[i][1] * g[j][1] + q * lam[i] * lam[j]);
                    me[i][j] += w * rho * lam[i] * lam[j];
                }
            }
        }
        let tri = mesh.triangles[t];
        for i in 0..3 {
            for j in 0..=i {
                let (a, b) = (index[tri[i]], index[tri[j]]);
                if a == usize::MAX || b == usize::MAX {
                    continue;
                }
                k_trip.push((a, b, ke[i][j]));
                m_trip.push((a, b, me[i][j]));
            }
        }
    }
    let n = dofs.len();
    Ok(AssembledSystem {
        stiffness: SparseSymmetric::from_lower_triplets(n, k_trip)?,
        mass: SparseSymmetric::from_lower_triplets(n, m_trip)?,
        n,
        mode_m,
        dofs,
        num_vertices: mesh.num_vertices(),
    })
}

/// Conformal S² form in the chart: `∫ ∇u·∇v dx = mu ∫ p² u v dx`.
pub fn assemble_s2(mesh: &TriangleMesh) -> Result<AssembledSystem> {
    if mesh.geometry != MeshGeometry::Chart {
        return Err(Error::InvalidInput("S² assembly needs a chart mesh".into()));
    }
    if mesh.vertices.iter().any(|v| v[0].hypot(v[1]) > 1.0 + 1e-12) {
        return Err(Error::HemisphereViolation("mesh leaves the unit chart disk".into()));
    }
    let terms =
        ElementTerms { stiffness: &|_| [1.0, 1.0], potential: None, mass: &|x| volume_weight(MeshGeometry::Chart, x) };
    assemble(mesh, &terms, &vec![true; mesh.num_vertices()], None)
}

/// Axisymmetric S³ form for azimuthal mode `m` on the `(theta, phi)`
/// meridian. The `2 pi` azimuthal factor is omitted. For `m ≥ 1` the
/// unknowns on the rotation axis (`phi ∈ {0, pi}`) are eliminated.
pub fn assemble_s3_axisym(mesh: &TriangleMesh, mode_m: i64) -> Result<AssembledSystem> {
    if mesh.geometry != MeshGeometry::Meridian {
        return Err(Error::InvalidInput("axisymmetric assembly needs a meridian mesh".into()));
    }
    if mode_m < 0 {
        return Err(Error::InvalidInput(format!("azimuthal mode must be non-negative, got {mode_m}")));
    }
    let m2 = (mode_m * mode_m) as f64;
    let keep: Vec<bool> =
        mesh.vertices.iter().map(|v| mode_m == 0 || (v[1] > AXIS_TOL && v[1] < PI - AXIS_TOL)).collect();
    let potential = move |x: [f64; 2]| m2 / x[1].sin();
    let terms = ElementTerms {
        stiffness: &|x| {
            let sp = x[1].sin();
            [x[0].sin().powi(2) * sp, sp]
        },
        potential: if mode_m > 0 { Some(&potential) } else { None },
        mass: &|x| volume_weight(MeshGeometry::Meridian, x),
    };
    assemble(mesh, &terms, &keep, Some(mode_m as usize))
}

/// Which eigensolver produced a spectrum.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolverPath {
    Dense,
    ShiftInvert,
}

#[derive(Debug, Clone)]
pub struct Spectrum {
    /// Ascending eigenvalues `mu_0 <= mu_1 <= ...`.
    pub values: Vec<f64>,
    /// M-orthonormal eigenvectors in unknown numbering.
    pub vectors: Vec<Vec<f64>>,
    pub residuals: Vec<f64>,
    pub path: SolverPath,
}

fn constant_mode(system: &AssembledSystem) -> Vec<f64> {
    let ones = vec![1.0; system.n];
    let norm = system.mass.bilinear(&ones, &ones).sqrt();
    vec![1.0 / norm; system.n]
}

/// Lowest `count` eigenpairs. Neumann systems return the exact constant
/// mode first and solve for the rest with the constants deflated.
pub fn neumann_spectrum(system: &AssembledSystem, count: usize) -> Result<Spectrum> {
    if count == 0 || count > system.n {
        return Err(Error::TooManyEigenpairs { requested: count, n: system.n });
    }
    let (k, m) = (&system.stiffness, &system.mass);
    let opts = LanczosOptions::default();
    if system.is_neumann() {
        let mut values = vec![0.0];
        let mut vectors = vec![constant_mode(system)];
        let mut residuals = vec![0.0];
        if count > 1 {
            let d = deflate_constants(m);
            let sigma = estimate_shift(k, m, Some(&d))?;
            let rest = lanczos_shift_invert(k, m, sigma, count - 1, Some(&d), &opts)?;
            values.extend(rest.values);
            vectors.extend(rest.vectors);
            residuals.extend(rest.residuals);
        }
        Ok(Spectrum { values, vectors, residuals, path: SolverPath::ShiftInvert })
    } else {
        let sigma = estimate_shift(k, m, None)?;
        let EigenPairs { values, vectors, residuals } = lanczos_shift_invert(k, m, sigma, count, None, &opts)?;
        Ok(Spectrum { values, vectors, residuals, path: SolverPath::ShiftInvert })
    }
}

/// Same spectrum through the dense reduction (small systems only).
pub fn neumann_spectrum_dense(system: &AssembledSystem, count: usize) -> Result<Spectrum> {
    let EigenPairs { values, vectors, residuals } = dense_generalized(&system.stiffness, &system.mass, count)?;
    Ok(Spectrum { values, vectors, residuals, path: SolverPath::Dense })
}

/// Share of the meridian Dirichlet energy carried by the `phi` derivative;
/// near zero for zonal (theta-only) modes.
pub fn angular_energy_fraction(mesh: &TriangleMesh, system: &AssembledSystem, x: &[f64]) -> f64 {
    let u = system.expand(x);
    let rule = mesh.rule();
    let (mut e_theta, mut e_phi) = (0.0, 0.0);
    for t in 0..mesh.num_triangles() {
        let c = mesh.corners(t);
        let g = gradients(c, mesh.area(t));
        let tri = mesh.triangles[t];
        let du = [0, 1].map(|d| (0..3).map(|i| u[tri[i]] * g[i][d]).sum::<f64>());
        for (p, _, w) in rule.on(c[0], c[1], c[2]) {
            let sp = p[1].sin();
            e_theta += w * p[0].sin().powi(2) * sp * du[0] * du[0];
            e_phi += w * sp * du[1] * du[1];
        }
    }
    e_phi / (e_theta + e_phi)
}

/// Bucket grid over the mesh for point location.
#[derive(Debug, Clone)]
pub struct PointLocator {
    lo: [f64; 2],
    cell: f64,
    nx: usize,
    ny: usize,
    buckets: Vec<Vec<usize>>,
}

impl PointLocator {
    pub fn new(mesh: &TriangleMesh) -> Self {
        let mut lo = [f64::INFINITY; 2];
        let mut hi = [f64::NEG_INFINITY; 2];
        for v in &mesh.vertices {
            for d in 0..2 {
                lo[d] = lo[d].min(v[d]);
                hi[d] = hi[d].max(v[d]);
            }
        }
        let side = (mesh.num_triangles() as f64).sqrt().ceil().max(1.0);
        let cell = ((hi[0] - lo[0]).max(hi[1] - lo[1]) / side).max(1e-12);
        let nx = ((hi[0] - lo[0]) / cell).floor() as usize + 1;
        let ny = ((hi[1] - lo[1]) / cell).floor() as usize + 1;
        let mut buckets = vec![Vec::new(); nx * ny];
        for t in 0..mesh.num_triangles() {
            let c = mesh.corners(t);
            let bx = |d: usize, f: fn(f64, f64) -> f64| c.iter().map(|p| p[d]).fold(c[0][d], f);
            let (i0, i1) = (((bx(0, f64::min) - lo[0]) / cell) as usize, ((bx(0, f64::max) - lo[0]) / cell) as usize);
            let (j0, j1) = (((bx(1, f64::min) - lo[1]) / cell) as usize, ((bx(1, f64::max) - lo[1]) / cell) as usize);
            for j in j0..=j1.min(ny - 1) {
                for i in i0..=i1.min(nx - 1) {
                    buckets[j * nx + i].push(t);
                }
            }
        }
        PointLocator { lo, cell, nx, ny, buckets }
    }

    /// Containing triangle and barycentric coordinates of `p`.
    pub fn locate(&self, mesh: &TriangleMesh, p: [f64; 2]) -> Option<(usize, [f64; 3])> {
        let i = ((p[0] - self.lo[0]) / self.cell).floor();
        let j = ((p[1] - self.lo[1]) / self.cell).floor();
        if i < 0.0 || j < 0.0 || i as usize >= self.nx || j as usize >= self.ny {
            return None;
        }
        let mut best: Option<(f64, usize, [f64; 3])> = None;
        for &t in &self.buckets[j as usize * self.nx + i as usize] {
            let b = barycentric(mesh.corners(t), p);
            let worst = b[0].min(b[1]).min(b[2]);
            if best.as_ref().is_none_or(|bb| worst > bb.0) {
                best = Some((worst, t, b));
            }
        }
        match best {
            Some((worst, t, b)) if worst >= -1e-10 => Some((t, b)),
            _ => None,
        }
    }

    /// Like [`PointLocator::locate`], but points slightly outside the mesh
    /// (between a curved boundary and its chords) get the closest nearby
    /// triangle and barycentric coordinates of the linear extension.
    pub fn locate_or_nearest(&self, mesh: &TriangleMesh, p: [f64; 2]) -> Option<(usize, [f64; 3])> {
        if let Some(hit) = self.locate(mesh, p) {
            return Some(hit);
        }
        let ci = ((p[0] - self.lo[0]) / self.cell).floor() as i64;
        let cj = ((p[1] - self.lo[1]) / self.cell).floor() as i64;
        let mut best: Option<(f64, usize)> = None;
        for j in cj - 1..=cj + 1 {
            for i in ci - 1..=ci + 1 {
                if i < 0 || j < 0 || i as usize >= self.nx || j as usize >= self.ny {
                    continue;
                }
                for &t in &self.buckets[j as usize * self.nx + i as usize] {
                    let c = mesh.corners(t);
                    let d = (0..3)
                        .map(|k| crate::mesh::segment_distance(p, c[k], c[(k + 1) % 3]))
                        .fold(f64::INFINITY, f64::min);
                    if best.is_none_or(|b| d < b.0) {
                        best = Some((d, t));
                    }
                }
            }
        }
        best.map(|(_, t)| (t, barycentric(mesh.corners(t), p)))
    }
}

fn barycentric(c: [[f64; 2]; 3], p: [f64; 2]) -> [f64; 3] {
    let det = (c[1][0] - c[0][0]) * (c[2][1] - c[0][1]) - (c[2][0] - c[0][0]) * (c[1][1] - c[0][1]);
    let l1 = ((p[0] - c[0][0]) * (c[2][1] - c[0][1]) - (c[2][0] - c[0][0]) * (p[1] - c[0][1])) / det;
    let l2 = ((c[1][0] - c[0][0]) * (p[1] - c[0][1]) - (p[0] - c[0][0]) * (c[1][1] - c[0][1])) / det;
    [1.0 - l1 - l2, l1, l2]
}

/// Barycentric P1 interpolation of vertex values at `p`.
pub fn interpolate(mesh: &TriangleMesh, locator: &PointLocator, values: &[f64], p: [f64; 2]) -> Result<f64> {
    let (t, b) = locator.locate(mesh, p).ok_or(Error::OutsideMesh(p[0], p[1]))?;
    let tri = mesh.triangles[t];
    Ok((0..3).map(|i| b[i] * values[tri[i]]).sum())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{build_meridian_mesh, build_planar_mesh, mesh_volume, BoundaryCurve, DomainSpec};

    fn reference_triangle() -> TriangleMesh {
        TriangleMesh {
            vertices: vec![[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]],
            triangles: vec![[0, 1, 2]],
            boundary_edges: vec![[0, 1], [1, 2], [2, 0]],
            h: 1.5,
            geometry: MeshGeometry::Chart,
            curve: BoundaryCurve::Polyline(vec![[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]]),
        }
    }

    #[test]
    fn reference_element_stiffness() {
        let s = assemble_s2(&reference_triangle()).unwrap();
        let expect = [[1.0, -0.5, -0.5], [-0.5, 0.5, 0.0], [-0.5, 0.0, 0.5]];
        for i in 0..3 {
            for j in 0..3 {
                assert!((s.stiffness.get(i, j) - expect[i][j]).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn s2_partition_of_unity_and_kernel() {
        let spec = DomainSpec::Cap { dim: 2, gamma: 1.0 };
        let mesh = build_planar_mesh(&spec, 0.1).unwrap();
        let s = assemble_s2(&mesh).unwrap();
        let ones = vec![1.0; s.n];
        let total: f64 = s.mass.mul_vec(&ones).iter().sum();
        assert!((total - mesh_volume(&mesh, &spec).value).abs() < 1e-12);
        assert!(s.stiffness.mul_vec(&ones).iter().all(|v| v.abs() < 1e-12));
    }

    #[test]
    fn hemisphere_first_pair_near_two() {
        let mesh = build_planar_mesh(&DomainSpec::Cap { dim: 2, gamma: PI / 2.0 }, 0.05).unwrap();
        let spec = neumann_spectrum(&assemble_s2(&mesh).unwrap(), 3).unwrap();
        assert!(spec.values[0].abs() < 1e-10);
        assert!((spec.values[1] - 2.0).abs() < 1e-2 && (spec.values[2] - 2.0).abs() < 1e-2, "{:?}", spec.values);
    }

    #[test]
    fn s3_mode_zero_kernel_and_axis_elimination() {
        let mesh = build_meridian_mesh(&DomainSpec::Cap { dim: 3, gamma: 1.0 }, 0.15).unwrap();
        let s0 = assemble_s3_axisym(&mesh, 0).unwrap();
        assert!(s0.stiffness.mul_vec(&vec![1.0; s0.n]).iter().all(|v| v.abs() < 1e-12));
        let s1 = assemble_s3_axisym(&mesh, 1).unwrap();
        assert!(s1.n < s0.n);
        assert!(assemble_s3_axisym(&mesh, -1).is_err());
    }

    #[test]
    fn interpolation_reproduces_linears() {
        let mesh = build_planar_mesh(&DomainSpec::Cap { dim: 2, gamma: 1.2 }, 0.1).unwrap();
        let loc = PointLocator::new(&mesh);
        let f: Vec<f64> = mesh.vertices.iter().map(|v| 0.3 + 2.0 * v[0] - v[1]).collect();
        for p in [[0.1, 0.2], [-0.3, 0.05], [0.0, 0.0]] {
            let u = interpolate(&mesh, &loc, &f, p).unwrap();
            assert!((u - (0.3 + 2.0 * p[0] - p[1])).abs() < 1e-14);
        }
        assert_eq!(interpolate(&mesh, &loc, &f, mesh.vertices[5]).unwrap(), f[5]);
        assert!(matches!(interpolate(&mesh, &loc, &f, [2.0, 0.0]), Err(Error::OutsideMesh(..))));
    }
}
