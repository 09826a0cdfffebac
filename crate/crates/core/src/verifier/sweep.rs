//! Parameter sweeps over domain families and caps, with CSV output that is
//! ordered by grid index regardless of evaluation order.

use std::io::Write;

use rayon::prelude::*;

use super::{verify_domain, InequalityReport, VerifyOptions};
use crate::cap_spectrum::{mu1_cap, solve_mode, CapProblem};
use crate::error::{Error, Result};
use crate::mesh::DomainSpec;

#[derive(Debug, Clone)]
pub struct SweepRow {
    pub index: usize,
    pub value: f64,
    pub result: std::result::Result<InequalityReport, String>,
}

/// Copy of `template` with one parameter replaced: `gamma`, `epsJ`, `cx`,
/// `cy`, `radius`, or `scale` (polygons and meridian profiles).
pub fn set_parameter(template: &DomainSpec, name: &str, value: f64) -> Result<DomainSpec> {
    let mut spec = template.clone();
    let unknown = || Error::InvalidInput(format!("parameter `{name}` does not apply to {}", template.kind().name()));
    match (&mut spec, name) {
        (DomainSpec::Cap { gamma, .. } | DomainSpec::PerturbedCap { gamma, .. }, "gamma") => *gamma = value,
        (DomainSpec::PerturbedCap { amplitudes, .. }, n) if n.starts_with("eps") => {
            let j: u32 = n[3..].parse().map_err(|_| unknown())?;
            amplitudes.retain(|a| a.0 != j);
            if value != 0.0 {
                amplitudes.push((j, value));
                amplitudes.sort_by_key(|a| a.0);
            }
        }
        (DomainSpec::DiskRegion { center, .. }, "cx") => center[0] = value,
        (DomainSpec::DiskRegion { center, .. }, "cy") => center[1] = value,
        (DomainSpec::DiskRegion { radius, .. }, "radius") => *radius = value,
        (DomainSpec::PolygonRegion { vertices }, "scale") => {
            for v in vertices.iter_mut() {
                *v = [v[0] * value, v[1] * value];
            }
        }
        (DomainSpec::MeridianRegion { vertices }, "scale") => {
            for v in vertices.iter_mut() {
                v[0] *= value;
            }
        }
        _ => return Err(unknown()),
    }
    spec.validate()?;
    Ok(spec)
}

/// One report per grid value; failures are recorded in the row.
pub fn sweep(template: &DomainSpec, name: &str, values: &[f64], opts: &VerifyOptions) -> Vec<SweepRow> {
    values
        .par_iter()
        .enumerate()
        .map(|(index, &value)| SweepRow {
            index,
            value,
            result: set_parameter(template, name, value)
                .and_then(|spec| verify_domain(&spec, opts))
                .map_err(|e| e.to_string()),
        })
        .collect()
}

fn num(x: f64) -> String {
    format!("{x:.16e}")
}

fn csv_error(e: csv::Error) -> Error {
    Error::Io(std::io::Error::other(e))
}

pub fn write_sweep_csv<W: Write>(rows: &[SweepRow], param: &str, dim: usize, out: W) -> Result<()> {
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(out);
    let mut header = vec!["index".to_string(), param.to_string(), "status".into(), "error".into()];
    header.extend(["domain_volume", "equivalent_gamma"].map(String::from));
    header.extend((1..=dim).map(|i| format!("mu_{i}")));
    header.extend(
        ["mu1_cap", "lhs", "rhs", "margin", "tolerance", "step20_pointwise", "step21", "step22", "balancing_residual"]
            .map(String::from),
    );
    w.write_record(&header).map_err(csv_error)?;
    for row in rows {
        let mut rec = vec![row.index.to_string(), num(row.value)];
        match &row.result {
            Ok(r) => {
                rec.push(if r.passed() { "pass" } else { "fail" }.into());
                rec.push(String::new());
                rec.extend([num(r.domain_volume), num(r.equivalent_gamma)]);
                rec.extend((0..dim).map(|i| r.eigenvalues.get(i).map_or(String::new(), |&m| num(m))));
                rec.extend([num(r.mu1_cap), num(r.lhs), num(r.rhs), num(r.margin), num(r.tolerance)]);
                match &r.proof {
                    Some(p) => {
                        rec.extend([num(p.step20_pointwise), num(p.step21), num(p.step22), num(p.balancing_residual)])
                    }
                    None => rec.extend(std::iter::repeat_n(String::new(), 4)),
                }
            }
            Err(e) => {
                rec.push("error".into());
                rec.push(e.clone());
                rec.extend(std::iter::repeat_n(String::new(), header.len() - 4));
            }
        }
        w.write_record(&rec).map_err(csv_error)?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Debug, Clone)]
pub struct CapSweepRow {
    pub gamma: f64,
    pub result: std::result::Result<CapSweepValues, String>,
}

#[derive(Debug, Clone, Copy)]
pub struct CapSweepValues {
    pub mu1: f64,
    pub mu_11: f64,
    pub mu_02: f64,
    /// Smallest `g'` of the `(1, 1)` profile over its grid on `[0, gamma)`.
    pub min_profile_slope: f64,
}

/// `mu_1(D_gamma)` and its two candidates along a grid of radii.
pub fn cap_sweep(dim: usize, gammas: &[f64]) -> Vec<CapSweepRow> {
    gammas
        .par_iter()
        .map(|&gamma| {
            let values = (|| -> Result<CapSweepValues> {
                let cap = mu1_cap(dim, gamma)?;
                let pair = solve_mode(&CapProblem::new(dim, gamma, 1)?, 1)?.remove(0);
                let n = pair.y_prime_values.len();
                let min_profile_slope = pair.y_prime_values[..n - 1].iter().copied().fold(f64::INFINITY, f64::min);
                Ok(CapSweepValues { mu1: cap.value, mu_11: cap.mu_11, mu_02: cap.mu_02, min_profile_slope })
            })();
            CapSweepRow { gamma, result: values.map_err(|e| e.to_string()) }
        })
        .collect()
}

pub fn write_cap_csv<W: Write>(rows: &[CapSweepRow], out: W) -> Result<()> {
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(out);
    w.write_record(["index", "gamma", "status", "error", "mu1", "mu_11", "mu_02", "min_profile_slope"])
        .map_err(csv_error)?;
    for (i, row) in rows.iter().enumerate() {
        let rec = match &row.result {
            Ok(v) => vec![
                i.to_string(),
                num(row.gamma),
                "ok".into(),
                String::new(),
                num(v.mu1),
                num(v.mu_11),
                num(v.mu_02),
                num(v.min_profile_slope),
            ],
            Err(e) => vec![
                i.to_string(),
                num(row.gamma),
                "error".into(),
                e.clone(),
                String::new(),
                String::new(),
                String::new(),
                String::new(),
            ],
        };
        w.write_record(&rec).map_err(csv_error)?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn parameters_are_replaced_or_rejected() {
        let base = DomainSpec::PerturbedCap { gamma: 1.0, amplitudes: vec![(2, 0.1)] };
        let s = set_parameter(&base, "eps3", 0.05).unwrap();
        assert_eq!(s, DomainSpec::PerturbedCap { gamma: 1.0, amplitudes: vec![(2, 0.1), (3, 0.05)] });
        let s = set_parameter(&base, "eps2", 0.0).unwrap();
        assert_eq!(s, DomainSpec::PerturbedCap { gamma: 1.0, amplitudes: vec![] });
        assert!(set_parameter(&base, "radius", 0.3).is_err());
        assert!(set_parameter(&DomainSpec::Cap { dim: 2, gamma: 1.0 }, "gamma", 2.0).is_err());
    }

    #[test]
    fn bad_rows_do_not_stop_the_sweep() {
        let base = DomainSpec::Cap { dim: 2, gamma: 1.0 };
        let opts = VerifyOptions { h: 0.15, refinements: 0, proof_steps: false };
        let rows = sweep(&base, "gamma", &[0.8, 2.0], &opts);
        assert!(rows[0].result.is_ok() && rows[1].result.is_err());
        let mut buf = Vec::new();
        write_sweep_csv(&rows, "gamma", 2, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().count(), 3);
        assert!(text.lines().nth(2).unwrap().contains(",error,"));
        let caps = cap_sweep(2, &[PI / 4.0]);
        let mut buf = Vec::new();
        write_cap_csv(&caps, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mu: f64 = text.lines().nth(1).unwrap().split(',').nth(4).unwrap().parse().unwrap();
        assert!((mu - 6.0).abs() < 1e-8);
    }
}
