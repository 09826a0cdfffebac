use std::f64::consts::PI;

/// Exact boundary of a meshed region, used for discretization and for
/// re-projecting new boundary vertices.
#[derive(Debug, Clone, PartialEq)]
pub enum BoundaryCurve {
    Circle {
        center: [f64; 2],
        radius: f64,
    },
    /// `r(phi) = base (1 + sum eps_j cos(j phi))` around `center`.
    Radial {
        center: [f64; 2],
        base: f64,
        amplitudes: Vec<(u32, f64)>,
    },
    /// Closed polygon, counter-clockwise, last vertex not repeated.
    Polyline(Vec<[f64; 2]>),
}

impl BoundaryCurve {
    /// Parameter period: `2 pi` for angular curves, perimeter for polylines.
    pub fn period(&self) -> f64 {
        match self {
            BoundaryCurve::Circle { .. } | BoundaryCurve::Radial { .. } => 2.0 * PI,
            BoundaryCurve::Polyline(v) => polyline_length(v),
        }
    }

    pub fn radius_at(&self, phi: f64) -> f64 {
        match self {
            BoundaryCurve::Circle { radius, .. } => *radius,
            BoundaryCurve::Radial { base, amplitudes, .. } => {
                base * (1.0 + amplitudes.iter().map(|&(j, e)| e * (j as f64 * phi).cos()).sum::<f64>())
            }
            BoundaryCurve::Polyline(_) => f64::NAN,
        }
    }

    fn radius_derivative(&self, phi: f64) -> f64 {
        match self {
            BoundaryCurve::Radial { base, amplitudes, .. } => {
                -base * amplitudes.iter().map(|&(j, e)| e * j as f64 * (j as f64 * phi).sin()).sum::<f64>()
            }
            _ => 0.0,
        }
    }

    pub fn point_at(&self, t: f64) -> [f64; 2] {
        match self {
            BoundaryCurve::Circle { center, .. } | BoundaryCurve::Radial { center, .. } => {
                let r = self.radius_at(t);
                [center[0] + r * t.cos(), center[1] + r * t.sin()]
            }
            BoundaryCurve::Polyline(v) => {
                let n = v.len();
                let mut t = t.rem_euclid(polyline_length(v));
                for i in 0..n {
                    let a = v[i];
                    let b = v[(i + 1) % n];
                    let len = dist(a, b);
                    if t <= len || i == n - 1 {
                        let u = if len > 0.0 { (t / len).min(1.0) } else { 0.0 };
                        return [a[0] + u * (b[0] - a[0]), a[1] + u * (b[1] - a[1])];
                    }
                    t -= len;
                }
                v[0]
            }
        }
    }

    /// Samples of `(parameter, point)` around the curve, with chords of at
    /// most `spacing` and every polyline corner included.
    pub fn discretize(&self, spacing: f64) -> Vec<(f64, [f64; 2])> {
        match self {
            BoundaryCurve::Circle { .. } | BoundaryCurve::Radial { .. } => {
                let max_speed = (0..4096)
                    .map(|k| {
                        let phi = 2.0 * PI * k as f64 / 4096.0;
                        self.radius_at(phi).hypot(self.radius_derivative(phi))
                    })
                    .fold(0.0f64, f64::max);
                let n = ((2.0 * PI * max_speed / spacing).ceil() as usize).max(12);
                (0..n)
                    .map(|k| {
                        let t = 2.0 * PI * k as f64 / n as f64;
                        (t, self.point_at(t))
                    })
                    .collect()
            }
            BoundaryCurve::Polyline(v) => {
                let n = v.len();
                let mut out = Vec::new();
                let mut start = 0.0;
                for i in 0..n {
                    let a = v[i];
                    let b = v[(i + 1) % n];
                    let len = dist(a, b);
                    let m = ((len / spacing).ceil() as usize).max(1);
                    for k in 0..m {
                        let u = k as f64 / m as f64;
                        out.push((start + u * len, [a[0] + u * (b[0] - a[0]), a[1] + u * (b[1] - a[1])]));
                    }
                    start += len;
                }
                out
            }
        }
    }

    /// Parameter halfway between `t0` and `t1` going forward around the curve.
    pub fn mid_parameter(&self, t0: f64, t1: f64) -> f64 {
        let period = self.period();
        let mut t1 = t1;
        while t1 <= t0 {
            t1 += period;
        }
        (0.5 * (t0 + t1)).rem_euclid(period)
    }

    /// New vertex for the boundary edge `(a, b)` during uniform refinement.
    pub fn project_midpoint(&self, a: [f64; 2], b: [f64; 2]) -> [f64; 2] {
        match self {
            BoundaryCurve::Circle { center, .. } | BoundaryCurve::Radial { center, .. } => {
                let ta = (a[1] - center[1]).atan2(a[0] - center[0]);
                let tb = (b[1] - center[1]).atan2(b[0] - center[0]);
                let mut d = tb - ta;
                if d > PI {
                    d -= 2.0 * PI;
                } else if d < -PI {
                    d += 2.0 * PI;
                }
                self.point_at(ta + 0.5 * d)
            }
            BoundaryCurve::Polyline(_) => [0.5 * (a[0] + b[0]), 0.5 * (a[1] + b[1])],
        }
    }
}

pub(crate) fn dist(a: [f64; 2], b: [f64; 2]) -> f64 {
    (a[0] - b[0]).hypot(a[1] - b[1])
}

fn polyline_length(v: &[[f64; 2]]) -> f64 {
    (0..v.len()).map(|i| dist(v[i], v[(i + 1) % v.len()])).sum()
}

/// Signed area of a closed polygon (positive when counter-clockwise).
pub fn signed_area(v: &[[f64; 2]]) -> f64 {
    let n = v.len();
    0.5 * (0..n)
        .map(|i| {
            let a = v[i];
            let b = v[(i + 1) % n];
            a[0] * b[1] - b[0] * a[1]
        })
        .sum::<f64>()
}

/// Even-odd point-in-polygon test.
pub fn point_in_polygon(p: [f64; 2], v: &[[f64; 2]]) -> bool {
    let n = v.len();
    let mut inside = false;
    let mut j = n - 1;
    for i in 0..n {
        let (a, b) = (v[i], v[j]);
        if (a[1] > p[1]) != (b[1] > p[1]) {
            let x = a[0] + (p[1] - a[1]) * (b[0] - a[0]) / (b[1] - a[1]);
            if p[0] < x {
                inside = !inside;
            }
        }
        j = i;
    }
    inside
}

/// Distance from `p` to the segment `ab`.
pub fn segment_distance(p: [f64; 2], a: [f64; 2], b: [f64; 2]) -> f64 {
    let d = [b[0] - a[0], b[1] - a[1]];
    let len2 = d[0] * d[0] + d[1] * d[1];
    let u = if len2 > 0.0 { (((p[0] - a[0]) * d[0] + (p[1] - a[1]) * d[1]) / len2).clamp(0.0, 1.0) } else { 0.0 };
    dist(p, [a[0] + u * d[0], a[1] + u * d[1]])
}

fn segments_cross(a: [f64; 2], b: [f64; 2], c: [f64; 2], d: [f64; 2]) -> bool {
    let o = |p: [f64; 2], q: [f64; 2], r: [f64; 2]| (q[0] - p[0]) * (r[1] - p[1]) - (q[1] - p[1]) * (r[0] - p[0]);
    let (d1, d2, d3, d4) = (o(a, b, c), o(a, b, d), o(c, d, a), o(c, d, b));
    (d1 > 0.0) != (d2 > 0.0) && (d3 > 0.0) != (d4 > 0.0) && d1 != 0.0 && d2 != 0.0 && d3 != 0.0 && d4 != 0.0
}

/// True when no two non-adjacent edges of the closed polygon intersect.
pub fn is_simple_polygon(v: &[[f64; 2]]) -> bool {
    let n = v.len();
    for i in 0..n {
        for j in i + 1..n {
            if j == i + 1 || (i == 0 && j == n - 1) {
                continue;
            }
            if segments_cross(v[i], v[(i + 1) % n], v[j], v[(j + 1) % n]) {
                return false;
            }
        }
    }
    true
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn circle_discretization_respects_spacing() {
        let c = BoundaryCurve::Circle { center: [0.1, -0.2], radius: 0.5 };
        let pts = c.discretize(0.05);
        for i in 0..pts.len() {
            let d = dist(pts[i].1, pts[(i + 1) % pts.len()].1);
            assert!(d <= 0.05 + 1e-12);
        }
    }

    #[test]
    fn polyline_keeps_corners() {
        let v = vec![[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]];
        let c = BoundaryCurve::Polyline(v.clone());
        let pts: Vec<[f64; 2]> = c.discretize(0.3).into_iter().map(|p| p.1).collect();
        for corner in v {
            assert!(pts.contains(&corner));
        }
    }

    #[test]
    fn simple_polygon_detection() {
        assert!(is_simple_polygon(&[[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]]));
        assert!(!is_simple_polygon(&[[0.0, 0.0], [1.0, 1.0], [1.0, 0.0], [0.0, 1.0]]));
    }
}
