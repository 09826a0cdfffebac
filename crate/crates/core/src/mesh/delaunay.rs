//! Incremental Delaunay triangulation with conforming boundary recovery and
//! Ruppert-style quality refinement.

use std::collections::{HashMap, HashSet};

use super::boundary::{point_in_polygon, BoundaryCurve};
use crate::error::{Error, Result};

const NONE: usize = usize::MAX;

#[derive(Debug, Clone, Copy)]
struct Tri {
    v: [usize; 3],
    /// `n[i]` is the neighbour across the edge opposite `v[i]`.
    n: [usize; 3],
    alive: bool,
}

fn orient(a: [f64; 2], b: [f64; 2], c: [f64; 2]) -> f64 {
    (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])
}

fn in_circle(a: [f64; 2], b: [f64; 2], c: [f64; 2], p: [f64; 2]) -> f64 {
    let (ax, ay) = (a[0] - p[0], a[1] - p[1]);
    let (bx, by) = (b[0] - p[0], b[1] - p[1]);
    let (cx, cy) = (c[0] - p[0], c[1] - p[1]);
    let a2 = ax * ax + ay * ay;
    let b2 = bx * bx + by * by;
    let c2 = cx * cx + cy * cy;
    ax * (by * c2 - b2 * cy) - ay * (bx * c2 - b2 * cx) + a2 * (bx * cy - by * cx)
}

pub(crate) fn circumcenter(a: [f64; 2], b: [f64; 2], c: [f64; 2]) -> [f64; 2] {
    let (bx, by) = (b[0] - a[0], b[1] - a[1]);
    let (cx, cy) = (c[0] - a[0], c[1] - a[1]);
    let d = 2.0 * (bx * cy - by * cx);
    let b2 = bx * bx + by * by;
    let c2 = cx * cx + cy * cy;
    [a[0] + (cy * b2 - by * c2) / d, a[1] + (bx * c2 - cx * b2) / d]
}

/// Smallest interior angle (radians) and longest edge of a triangle.
pub(crate) fn triangle_shape(a: [f64; 2], b: [f64; 2], c: [f64; 2]) -> (f64, f64) {
    let sq = |p: [f64; 2], q: [f64; 2]| (p[0] - q[0]).powi(2) + (p[1] - q[1]).powi(2);
    let (la, lb, lc) = (sq(b, c), sq(c, a), sq(a, b));
    let angle = |opp: f64, s1: f64, s2: f64| ((s1 + s2 - opp) / (2.0 * (s1 * s2).sqrt())).clamp(-1.0, 1.0).acos();
    let min = angle(la, lb, lc).min(angle(lb, lc, la)).min(angle(lc, la, lb));
    (min, la.max(lb).max(lc).sqrt())
}

struct Delaunay {
    points: Vec<[f64; 2]>,
    tris: Vec<Tri>,
    mark: Vec<u32>,
    stamp: u32,
    last: usize,
}

impl Delaunay {
    fn new(lo: [f64; 2], hi: [f64; 2]) -> Self {
        let cx = 0.5 * (lo[0] + hi[0]);
        let cy = 0.5 * (lo[1] + hi[1]);
        let r = 100.0 * (hi[0] - lo[0]).max(hi[1] - lo[1]).max(1e-3);
        let points = vec![[cx - r, cy - r], [cx + r, cy - r], [cx, cy + r]];
        let tris = vec![Tri { v: [0, 1, 2], n: [NONE; 3], alive: true }];
        Delaunay { points, tris, mark: vec![0], stamp: 0, last: 0 }
    }

    fn is_super(v: usize) -> bool {
        v < 3
    }

    fn locate(&self, p: [f64; 2]) -> Result<usize> {
        let mut t = self.last;
        if !self.tris[t].alive {
            t = self.tris.iter().rposition(|t| t.alive).unwrap_or(0);
        }
        let mut steps = 0usize;
        'walk: loop {
            steps += 1;
            if steps > 4 * self.tris.len() + 100 {
                break;
            }
            let tri = &self.tris[t];
            for k in 0..3 {
                let i = (k + steps) % 3;
                let a = self.points[tri.v[(i + 1) % 3]];
                let b = self.points[tri.v[(i + 2) % 3]];
                if orient(a, b, p) < 0.0 {
                    if tri.n[i] == NONE {
                        return Err(Error::InvalidMesh("point outside triangulation bounds".into()));
                    }
                    t = tri.n[i];
                    continue 'walk;
                }
            }
            return Ok(t);
        }
        // Walking can cycle when p sits on an edge and rounding disagrees
        // between the two sides; pick the least-violated triangle instead.
        let mut best = (f64::NEG_INFINITY, NONE);
        for (t, tri) in self.tris.iter().enumerate() {
            if !tri.alive {
                continue;
            }
            let worst = (0..3)
                .map(|i| orient(self.points[tri.v[(i + 1) % 3]], self.points[tri.v[(i + 2) % 3]], p))
                .fold(f64::INFINITY, f64::min);
            if worst > best.0 {
                best = (worst, t);
            }
        }
        if best.1 == NONE || best.0 < -1e-12 {
            return Err(Error::InvalidMesh(format!("point location failed for {p:?}")));
        }
        Ok(best.1)
    }

    fn circumcircle_contains(&self, t: usize, p: [f64; 2]) -> bool {
        let v = self.tris[t].v;
        in_circle(self.points[v[0]], self.points[v[1]], self.points[v[2]], p) > 0.0
    }

    /// Inserts `p`; returns the index of the new (or coincident) vertex.
    fn insert(&mut self, p: [f64; 2]) -> Result<usize> {
        let t0 = self.locate(p)?;
        let scale = {
            let v = self.tris[t0].v;
            triangle_shape(self.points[v[0]], self.points[v[1]], self.points[v[2]]).1
        };
        for &v in &self.tris[t0].v {
            let q = self.points[v];
            if (q[0] - p[0]).hypot(q[1] - p[1]) <= 1e-12 * scale.max(1e-300) {
                return Ok(v);
            }
        }
        self.stamp += 1;
        let stamp = self.stamp;
        let mut cavity = vec![t0];
        self.mark[t0] = stamp;
        // A point on an edge of the containing triangle must take the
        // neighbour across that edge into the cavity.
        for i in 0..3 {
            let tri = self.tris[t0];
            let a = self.points[tri.v[(i + 1) % 3]];
            let b = self.points[tri.v[(i + 2) % 3]];
            let nb = tri.n[i];
            if nb != NONE && orient(a, b, p).abs() <= 1e-14 * scale * scale {
                self.mark[nb] = stamp;
                cavity.push(nb);
            }
        }
        let mut k = 0;
        while k < cavity.len() {
            let t = cavity[k];
            k += 1;
            for i in 0..3 {
                let nb = self.tris[t].n[i];
                if nb != NONE && self.mark[nb] != stamp && self.circumcircle_contains(nb, p) {
                    self.mark[nb] = stamp;
                    cavity.push(nb);
                }
            }
        }
        // Keep the cavity star-shaped with respect to p.
        let boundary = loop {
            let mut boundary = Vec::new();
            let mut drop = None;
            for &t in &cavity {
                let tri = self.tris[t];
                for i in 0..3 {
                    let nb = tri.n[i];
                    if nb == NONE || self.mark[nb] != stamp {
                        let a = tri.v[(i + 1) % 3];
                        let b = tri.v[(i + 2) % 3];
                        if orient(self.points[a], self.points[b], p) <= 0.0 && t != t0 {
                            drop = Some(t);
                        }
                        boundary.push((a, b, nb));
                    }
                }
            }
            match drop {
                Some(t) => {
                    self.mark[t] = 0;
                    cavity.retain(|&c| c != t);
                }
                None => break boundary,
            }
        };
        let vi = self.points.len();
        self.points.push(p);
        let first = self.tris.len();
        for &(a, b, outer) in &boundary {
            let id = self.tris.len();
            self.tris.push(Tri { v: [a, b, vi], n: [NONE, NONE, outer], alive: true });
            self.mark.push(0);
            if outer != NONE {
                let o = &mut self.tris[outer];
                for j in 0..3 {
                    if o.v[(j + 1) % 3] == b && o.v[(j + 2) % 3] == a {
                        o.n[j] = id;
                    }
                }
            }
        }
        for id in first..self.tris.len() {
            let [a, b, _] = self.tris[id].v;
            let next = (first..self.tris.len()).find(|&o| self.tris[o].v[0] == b);
            let prev = (first..self.tris.len()).find(|&o| self.tris[o].v[1] == a);
            match (next, prev) {
                (Some(nx), Some(pv)) => {
                    self.tris[id].n[0] = nx;
                    self.tris[id].n[1] = pv;
                }
                _ => return Err(Error::InvalidMesh("cavity boundary is not a closed loop".into())),
            }
        }
        for &t in &cavity {
            self.tris[t].alive = false;
        }
        self.last = first;
        #[cfg(test)]
        if std::env::var("DT_CHECK").is_ok() {
            self.check_topology().map_err(|e| Error::InvalidMesh(format!("{e} after inserting {p:?}")))?;
        }
        Ok(vi)
    }

    #[cfg(test)]
    fn check_topology(&self) -> std::result::Result<(), String> {
        for (t, tri) in self.tris.iter().enumerate() {
            if !tri.alive {
                continue;
            }
            let [a, b, c] = tri.v.map(|v| self.points[v]);
            if orient(a, b, c) <= 0.0 {
                return Err(format!("triangle {t} {:?} not ccw", tri.v));
            }
            for i in 0..3 {
                let nb = tri.n[i];
                if nb == NONE {
                    continue;
                }
                if !self.tris[nb].alive {
                    return Err(format!("triangle {t} points to dead {nb}"));
                }
                if !self.tris[nb].n.contains(&t) {
                    return Err(format!("neighbour {nb} of {t} does not point back"));
                }
            }
        }
        Ok(())
    }

    fn edge_map(&self) -> HashMap<(usize, usize), usize> {
        let mut map = HashMap::new();
        for (t, tri) in self.tris.iter().enumerate() {
            if tri.alive {
                for i in 0..3 {
                    map.insert((tri.v[i], tri.v[(i + 1) % 3]), t);
                }
            }
        }
        map
    }
}

#[derive(Debug, Clone, Copy)]
struct BoundaryNode {
    vertex: usize,
    param: f64,
}

/// Output of the mesher before packaging into a `TriangleMesh`.
pub(crate) struct RawMesh {
    pub points: Vec<[f64; 2]>,
    pub triangles: Vec<[usize; 3]>,
}

pub(crate) struct MeshOptions {
    pub h: f64,
    pub min_angle_deg: f64,
    pub max_points: usize,
}

/// Triangulates the region enclosed by `curve` (counter-clockwise).
pub(crate) fn mesh_region(curve: &BoundaryCurve, opts: &MeshOptions) -> Result<RawMesh> {
    // Aim slightly below h so that boundary re-projection during uniform
    // refinement keeps the max-edge bound.
    let h = 0.94 * opts.h;
    let boundary_spacing = match curve {
        BoundaryCurve::Polyline(_) => 0.8 * h,
        _ => 0.5 * h,
    };
    let samples = curve.discretize(boundary_spacing);
    let polygon: Vec<[f64; 2]> = samples.iter().map(|s| s.1).collect();
    let mut lo = [f64::INFINITY; 2];
    let mut hi = [f64::NEG_INFINITY; 2];
    for p in &polygon {
        for d in 0..2 {
            lo[d] = lo[d].min(p[d]);
            hi[d] = hi[d].max(p[d]);
        }
    }
    let mut dt = Delaunay::new(lo, hi);
    let mut nodes = Vec::with_capacity(samples.len());
    for (param, p) in &samples {
        let vertex = dt.insert(*p)?;
        nodes.push(BoundaryNode { vertex, param: *param });
    }

    // Interior points on a hexagonal lattice, kept clear of the boundary.
    let spacing = 0.85 * h;
    let row = spacing * 3f64.sqrt() / 2.0;
    let ny = ((hi[1] - lo[1]) / row).ceil() as i64;
    let nx = ((hi[0] - lo[0]) / spacing).ceil() as i64 + 1;
    let y0 = 0.5 * (lo[1] + hi[1]) - 0.5 * ny as f64 * row;
    let x0 = 0.5 * (lo[0] + hi[0]) - 0.5 * nx as f64 * spacing;
    let clearance = 0.55 * spacing;
    for j in 0..=ny {
        for i in 0..=nx {
            let shift = if j % 2 == 0 { 0.0 } else { 0.5 * spacing };
            let p = [x0 + i as f64 * spacing + shift, y0 + j as f64 * row];
            if !point_in_polygon(p, &polygon) {
                continue;
            }
            let near = (0..polygon.len()).any(|k| {
                super::boundary::segment_distance(p, polygon[k], polygon[(k + 1) % polygon.len()]) < clearance
            });
            if !near {
                dt.insert(p)?;
            }
        }
    }

    let min_angle = opts.min_angle_deg.to_radians();
    for _pass in 0..200 {
        recover_boundary(&mut dt, curve, &mut nodes, opts)?;
        let inside = classify_inside(&dt, &nodes);
        let poly: Vec<[f64; 2]> = nodes.iter().map(|n| dt.points[n.vertex]).collect();
        let mut bad: Vec<(f64, usize)> = Vec::new();
        for (t, tri) in dt.tris.iter().enumerate() {
            if !tri.alive || !inside[t] {
                continue;
            }
            let [a, b, c] = tri.v.map(|v| dt.points[v]);
            let (ang, edge) = triangle_shape(a, b, c);
            if ang < min_angle || edge > h {
                bad.push((ang.min(min_angle) - edge / h, t));
            }
        }
        if bad.is_empty() {
            return Ok(extract(&dt, &inside));
        }
        if dt.points.len() > opts.max_points {
            return Err(Error::InvalidMesh(format!("refinement exceeded {} vertices", opts.max_points)));
        }
        bad.sort_by(|x, y| x.0.total_cmp(&y.0));
        let mut split = HashSet::new();
        for (_, t) in bad {
            if !dt.tris[t].alive {
                continue;
            }
            let [a, b, c] = dt.tris[t].v.map(|v| dt.points[v]);
            let cc = circumcenter(a, b, c);
            let mut encroached = false;
            for k in 0..nodes.len() {
                let a = dt.points[nodes[k].vertex];
                let b = dt.points[nodes[(k + 1) % nodes.len()].vertex];
                if (cc[0] - a[0]) * (cc[0] - b[0]) + (cc[1] - a[1]) * (cc[1] - b[1]) < 0.0 {
                    split.insert(k);
                    encroached = true;
                }
            }
            if !encroached && split.is_empty() && point_in_polygon(cc, &poly) {
                dt.insert(cc)?;
            }
        }
        if !split.is_empty() {
            split_segments(&mut dt, curve, &mut nodes, &split)?;
        }
    }
    Err(Error::InvalidMesh("quality refinement did not terminate".into()))
}

fn split_segments(
    dt: &mut Delaunay,
    curve: &BoundaryCurve,
    nodes: &mut Vec<BoundaryNode>,
    split: &HashSet<usize>,
) -> Result<()> {
    let mut out = Vec::with_capacity(nodes.len() + split.len());
    for k in 0..nodes.len() {
        out.push(nodes[k]);
        if split.contains(&k) {
            let next = nodes[(k + 1) % nodes.len()];
            let param = curve.mid_parameter(nodes[k].param, next.param);
            let vertex = dt.insert(curve.point_at(param))?;
            out.push(BoundaryNode { vertex, param });
        }
    }
    *nodes = out;
    Ok(())
}

/// Splits boundary segments until every one is a Delaunay edge whose
/// diametral circle holds no other vertex.
fn recover_boundary(
    dt: &mut Delaunay,
    curve: &BoundaryCurve,
    nodes: &mut Vec<BoundaryNode>,
    opts: &MeshOptions,
) -> Result<()> {
    loop {
        let edges = dt.edge_map();
        let mut split = HashSet::new();
        for k in 0..nodes.len() {
            let a = nodes[k].vertex;
            let b = nodes[(k + 1) % nodes.len()].vertex;
            let Some(&t) = edges.get(&(a, b)) else {
                split.insert(k);
                continue;
            };
            let (pa, pb) = (dt.points[a], dt.points[b]);
            let mut apexes = vec![dt.tris[t].v.into_iter().find(|&v| v != a && v != b).unwrap()];
            if let Some(&o) = edges.get(&(b, a)) {
                apexes.push(dt.tris[o].v.into_iter().find(|&v| v != a && v != b).unwrap());
            }
            for c in apexes {
                if Delaunay::is_super(c) {
                    continue;
                }
                let pc = dt.points[c];
                if (pc[0] - pa[0]) * (pc[0] - pb[0]) + (pc[1] - pa[1]) * (pc[1] - pb[1]) < 0.0 {
                    split.insert(k);
                }
            }
        }
        if split.is_empty() {
            return Ok(());
        }
        if dt.points.len() > opts.max_points {
            return Err(Error::InvalidMesh("boundary recovery did not terminate".into()));
        }
        split_segments(dt, curve, nodes, &split)?;
    }
}

/// Flood fill from the super-triangle vertices, stopping at boundary segments.
fn classify_inside(dt: &Delaunay, nodes: &[BoundaryNode]) -> Vec<bool> {
    let mut wall = HashSet::new();
    for k in 0..nodes.len() {
        let a = nodes[k].vertex;
        let b = nodes[(k + 1) % nodes.len()].vertex;
        wall.insert((a.min(b), a.max(b)));
    }
    let mut outside = vec![false; dt.tris.len()];
    let mut stack: Vec<usize> = (0..dt.tris.len())
        .filter(|&t| dt.tris[t].alive && dt.tris[t].v.iter().any(|&v| Delaunay::is_super(v)))
        .collect();
    for &t in &stack {
        outside[t] = true;
    }
    while let Some(t) = stack.pop() {
        let tri = dt.tris[t];
        for i in 0..3 {
            let nb = tri.n[i];
            if nb == NONE || outside[nb] {
                continue;
            }
            let (a, b) = (tri.v[(i + 1) % 3], tri.v[(i + 2) % 3]);
            if wall.contains(&(a.min(b), a.max(b))) {
                continue;
            }
            outside[nb] = true;
            stack.push(nb);
        }
    }
    dt.tris.iter().enumerate().map(|(t, tri)| tri.alive && !outside[t]).collect()
}

fn extract(dt: &Delaunay, inside: &[bool]) -> RawMesh {
    let mut remap = vec![NONE; dt.points.len()];
    let mut points = Vec::new();
    let mut triangles = Vec::new();
    for (t, tri) in dt.tris.iter().enumerate() {
        if !inside[t] {
            continue;
        }
        let mut idx = [0; 3];
        for i in 0..3 {
            let v = tri.v[i];
            if remap[v] == NONE {
                remap[v] = points.len();
                points.push(dt.points[v]);
            }
            idx[i] = remap[v];
        }
        triangles.push(idx);
    }
    RawMesh { points, triangles }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn collinear_insertions_stay_consistent() {
        let mut dt = Delaunay::new([0.0, 0.0], [1.0, 1.0]);
        for k in 0..=20 {
            dt.insert([k as f64 / 20.0, 0.0]).unwrap();
            dt.check_topology().unwrap();
        }
        for k in 0..=20 {
            dt.insert([k as f64 / 20.0, 1.0 - k as f64 / 20.0]).unwrap();
            dt.check_topology().unwrap();
        }
        for k in 0..100 {
            let x = (k as f64 * 0.618).fract();
            let y = (k as f64 * 0.377).fract() * (1.0 - x);
            dt.insert([x, y]).unwrap();
            dt.check_topology().unwrap();
        }
    }
}
