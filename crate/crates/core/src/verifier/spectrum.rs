//! Low Neumann spectrum of a whole domain: the S² FEM directly, or the S³
//! azimuthal modes merged with their multiplicities, optionally improved by
//! Richardson extrapolation over uniform refinements.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::fem::{assemble_s2, assemble_s3_axisym, neumann_spectrum, AssembledSystem, PointLocator};
use crate::mesh::{build_meridian_mesh, build_planar_mesh, refine, DomainSpec, TriangleMesh};

/// One eigenvalue of the domain with its eigenfunction on the finest mesh.
#[derive(Debug, Clone)]
pub struct Eigenmode {
    pub value: f64,
    /// Azimuthal order (always 0 on S²).
    pub m: usize,
    /// Index within its mode family, 1 for the lowest non-constant value.
    pub index: usize,
    /// `sin(m psi)` partner of a `cos(m psi)` mode.
    pub sine: bool,
    /// Nodal values at every mesh vertex, normalized to unit `L^2` norm on
    /// the domain (the meridian part for S³).
    pub vertex_values: Vec<f64>,
    /// Generalized residual on the finest mesh.
    pub residual: f64,
}

impl Eigenmode {
    /// Azimuthal factor of the S³ eigenfunction; 1 on S².
    pub fn azimuthal(&self, psi: f64, dim: usize) -> f64 {
        if dim == 2 {
            1.0
        } else if self.m == 0 {
            1.0 / (2.0 * PI).sqrt()
        } else if self.sine {
            (self.m as f64 * psi).sin() / PI.sqrt()
        } else {
            (self.m as f64 * psi).cos() / PI.sqrt()
        }
    }
}

#[derive(Debug, Clone)]
pub struct DomainSpectrum {
    pub dim: usize,
    pub mesh: TriangleMesh,
    /// Ascending non-zero eigenvalues (extrapolated when refinements > 0).
    pub modes: Vec<Eigenmode>,
    /// Raw sorted values on each mesh level, coarsest first.
    pub level_values: Vec<Vec<f64>>,
    /// Vertices of the finest mesh.
    pub num_dofs: usize,
    pub refinements: usize,
}

impl DomainSpectrum {
    pub fn values(&self) -> Vec<f64> {
        self.modes.iter().map(|m| m.value).collect()
    }

    pub fn max_residual(&self) -> f64 {
        self.modes.iter().map(|m| m.residual).fold(0.0, f64::max)
    }

    /// Values of mode `k` at chart points (S²) or `(theta, phi)` (S³).
    pub fn evaluator(&self) -> ModeEvaluator<'_> {
        ModeEvaluator { spectrum: self, locator: PointLocator::new(&self.mesh) }
    }
}

pub struct ModeEvaluator<'a> {
    spectrum: &'a DomainSpectrum,
    locator: PointLocator,
}

impl ModeEvaluator<'_> {
    /// Barycentric weights of the planar point, extrapolating just outside.
    pub fn locate(&self, x: [f64; 2]) -> Result<(usize, [f64; 3])> {
        self.locator.locate_or_nearest(&self.spectrum.mesh, x).ok_or(Error::OutsideMesh(x[0], x[1]))
    }

    pub fn value(&self, k: usize, at: (usize, [f64; 3]), psi: f64) -> f64 {
        let mode = &self.spectrum.modes[k];
        let tri = self.spectrum.mesh.triangles[at.0];
        let v: f64 = (0..3).map(|i| at.1[i] * mode.vertex_values[tri[i]]).sum();
        v * mode.azimuthal(psi, self.spectrum.dim)
    }
}

struct Family {
    m: usize,
    values: Vec<f64>,
    vectors: Vec<Vec<f64>>,
    residuals: Vec<f64>,
}

fn solve_families(mesh: &TriangleMesh, dim: usize, count: usize, modes_m: Option<&[usize]>) -> Result<Vec<Family>> {
    let family = |system: AssembledSystem, m: usize, want: usize| -> Result<Family> {
        let want = want.min(system.n - usize::from(system.is_neumann()));
        let total = want + usize::from(system.is_neumann());
        let s = neumann_spectrum(&system, total)?;
        let skip = usize::from(system.is_neumann());
        Ok(Family {
            m,
            values: s.values[skip..].to_vec(),
            vectors: s.vectors[skip..].iter().map(|x| system.expand(x)).collect(),
            residuals: s.residuals[skip..].to_vec(),
        })
    };
    if dim == 2 {
        return Ok(vec![family(assemble_s2(mesh)?, 0, count)?]);
    }
    let mut out = vec![family(assemble_s3_axisym(mesh, 0)?, 0, count)?];
    let per_mode = count.div_ceil(2);
    if let Some(ms) = modes_m {
        for &m in ms.iter().filter(|&&m| m > 0) {
            out.push(family(assemble_s3_axisym(mesh, m as i64)?, m, per_mode)?);
        }
        return Ok(out);
    }
    // higher azimuthal orders only raise the spectrum; stop once they cannot compete
    for m in 1.. {
        let current = merged_values(&out);
        let f = family(assemble_s3_axisym(mesh, m as i64)?, m, per_mode)?;
        let competes = current.len() < count || f.values[0] < current[count - 1];
        if !competes {
            break;
        }
        out.push(f);
    }
    Ok(out)
}

fn merged_values(families: &[Family]) -> Vec<f64> {
    let mut v: Vec<f64> = families
        .iter()
        .flat_map(|f| f.values.iter().flat_map(move |&x| std::iter::repeat_n(x, if f.m == 0 { 1 } else { 2 })))
        .collect();
    v.sort_by(f64::total_cmp);
    v
}

/// The `count` lowest non-zero Neumann eigenvalues of the domain, meshed at
/// `h` and refined `refinements` times; with refinements the last two levels
/// are Richardson-extrapolated per mode.
pub fn domain_spectrum(spec: &DomainSpec, h: f64, refinements: usize, count: usize) -> Result<DomainSpectrum> {
    spec.validate()?;
    if count == 0 {
        return Err(Error::InvalidInput("count must be at least 1".into()));
    }
    let dim = spec.dim();
    let mut mesh = if dim == 2 { build_planar_mesh(spec, h)? } else { build_meridian_mesh(spec, h)? };
    let mut levels: Vec<Vec<Family>> = Vec::new();
    let mut level_values = Vec::new();
    for level in 0..=refinements {
        if level > 0 {
            mesh = refine(&mesh);
        }
        // the finest level reuses the azimuthal orders found on the coarsest
        let ms: Option<Vec<usize>> = levels.first().map(|f: &Vec<Family>| f.iter().map(|f| f.m).collect());
        let fams = solve_families(&mesh, dim, count, ms.as_deref())?;
        level_values.push(merged_values(&fams));
        levels.push(fams);
    }
    let fine = levels.pop().unwrap();
    let coarse = levels.pop();
    let mut modes = Vec::new();
    for (fi, fam) in fine.iter().enumerate() {
        for (k, &value) in fam.values.iter().enumerate() {
            let value = match &coarse {
                Some(c) => match c[fi].values.get(k) {
                    Some(&vc) => (4.0 * value - vc) / 3.0,
                    None => value,
                },
                None => value,
            };
            let copies: &[bool] = if fam.m == 0 { &[false] } else { &[false, true] };
            for &sine in copies {
                modes.push(Eigenmode {
                    value,
                    m: fam.m,
                    index: k + 1,
                    sine,
                    vertex_values: fam.vectors[k].clone(),
                    residual: fam.residuals[k],
                });
            }
        }
    }
    modes.sort_by(|a, b| a.value.total_cmp(&b.value).then(a.m.cmp(&b.m)).then(a.sine.cmp(&b.sine)));
    if modes.len() < count {
        return Err(Error::TooManyEigenpairs { requested: count, n: modes.len() });
    }
    modes.truncate(count);
    let num_dofs = mesh.num_vertices();
    Ok(DomainSpectrum { dim, mesh, modes, level_values, num_dofs, refinements })
}
