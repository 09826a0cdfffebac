//! End-to-end checks of the inequality verifier.

use std::f64::consts::PI;

use sphere_neumann::cap_spectrum::mu1_cap;
use sphere_neumann::mesh::DomainSpec;
use sphere_neumann::stereographic::cap_volume;
use sphere_neumann::verifier::{exact_volume, sweep, verify_domain, write_sweep_csv, VerifyOptions};

fn opts(h: f64) -> VerifyOptions {
    VerifyOptions { h, refinements: 1, proof_steps: true }
}

/// Chart disk with centre distance `c` and radius `r` is a cap of this radius.
fn disk_cap_radius(c: f64, r: f64) -> f64 {
    (2.0 * (c + r).atan() - 2.0 * (c - r).atan()) / 2.0
}

#[test]
fn offset_disk_matches_centred_cap() {
    let (c, r) = (0.3f64, 0.4f64);
    let gamma = disk_cap_radius(c, r);
    let disk = DomainSpec::DiskRegion { center: [c * 0.6, -c * 0.8], radius: r };
    let cap = DomainSpec::Cap { dim: 2, gamma };

    let v_disk = exact_volume(&disk).unwrap();
    let v_cap = cap_volume(2, gamma).unwrap().value;
    assert!((v_disk - v_cap).abs() < 1e-9 * v_cap, "{v_disk} vs {v_cap}");

    let a = verify_domain(&disk, &opts(0.06)).unwrap();
    let b = verify_domain(&cap, &opts(0.06)).unwrap();
    assert!((a.equivalent_gamma - gamma).abs() < 1e-6);
    assert!((a.mu1_cap - mu1_cap(2, gamma).unwrap().value).abs() < 1e-6 * a.mu1_cap);
    for (x, y) in a.eigenvalues.iter().zip(&b.eigenvalues) {
        assert!((x - y).abs() < 2e-3 * y, "{:?} vs {:?}", a.eigenvalues, b.eigenvalues);
    }
    assert!(a.passed() && b.passed());
    assert!(a.margin.abs() <= a.tolerance && b.margin.abs() <= b.tolerance);
    assert!(a.proof.unwrap().all_hold());
}

#[test]
fn square_has_positive_margin() {
    let s = 0.45;
    let square = DomainSpec::PolygonRegion { vertices: vec![[-s, -s], [s, -s], [s, s], [-s, s]] };
    let r = verify_domain(&square, &opts(0.06)).unwrap();
    assert!(r.margin > r.tolerance, "margin {} tolerance {}", r.margin, r.tolerance);
    let proof = r.proof.unwrap();
    assert!(proof.all_hold(), "{proof:?}");
    assert!(r.max_residual <= 1e-8);
}

#[test]
fn s3_cap_is_an_equality() {
    let r = verify_domain(&DomainSpec::Cap { dim: 3, gamma: PI / 3.0 }, &opts(0.08)).unwrap();
    assert_eq!(r.eigenvalues.len(), 3);
    assert!(r.margin.abs() <= r.tolerance, "margin {} tolerance {}", r.margin, r.tolerance);
}

#[test]
fn sweep_rows_keep_order_and_write_csv() {
    let template = DomainSpec::PerturbedCap { gamma: PI / 4.0, amplitudes: vec![(2, 0.0)] };
    let values = [0.0, 0.1];
    let rows = sweep(&template, "eps2", &values, &VerifyOptions { h: 0.08, refinements: 0, proof_steps: false });
    assert_eq!(rows.len(), 2);
    for (row, v) in rows.iter().zip(values) {
        assert_eq!(row.value, v);
        assert!(row.result.is_ok());
    }
    let m0 = rows[0].result.as_ref().unwrap().margin;
    let m1 = rows[1].result.as_ref().unwrap().margin;
    assert!(m1 > m0, "{m0} {m1}");

    let mut buf = Vec::new();
    write_sweep_csv(&rows, "eps2", 2, &mut buf).unwrap();
    let text = String::from_utf8(buf).unwrap();
    let mut lines = text.lines();
    assert!(lines.next().unwrap().starts_with("index,eps2,"));
    assert_eq!(lines.count(), 2);
}

#[test]
fn unknown_sweep_parameter_is_an_error_row() {
    let rows = sweep(&DomainSpec::Cap { dim: 2, gamma: 1.0 }, "eps7", &[0.1], &VerifyOptions::default());
    assert!(rows[0].result.is_err());
}

#[test]
fn nonpositive_mesh_size_is_rejected() {
    let cap = DomainSpec::Cap { dim: 2, gamma: 1.0 };
    assert!(verify_domain(&cap, &VerifyOptions { h: 0.0, refinements: 0, proof_steps: false }).is_err());
}
