use std::fs;
use std::path::PathBuf;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_sphere-neumann"))
}

fn scratch(name: &str, contents: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("sphere-neumann-cli-{}", std::process::id()));
    fs::create_dir_all(&dir).unwrap();
    let path = dir.join(name);
    fs::write(&path, contents).unwrap();
    path
}

fn run(cmd: &mut Command) -> (i32, String, String) {
    let Output { status, stdout, stderr } = cmd.output().unwrap();
    (status.code().unwrap(), String::from_utf8(stdout).unwrap(), String::from_utf8(stderr).unwrap())
}

#[test]
fn cap_spectrum_prints_hemisphere_values() {
    let (code, out, _) = run(bin().args(["cap-spectrum", "--dim", "2", "--gamma", "pi/2", "--l", "1", "--kmax", "2"]));
    assert_eq!(code, 0);
    let mut lines = out.lines();
    assert_eq!(lines.next(), Some("l,k,mu"));
    let first: f64 = lines.next().unwrap().split(',').nth(2).unwrap().parse().unwrap();
    assert!((first - 2.0).abs() < 1e-9);
    let second: f64 = lines.next().unwrap().split(',').nth(2).unwrap().parse().unwrap();
    assert!((second - 12.0).abs() < 1e-8);
}

#[test]
fn verify_passes_on_a_square_and_writes_csv() {
    let spec = scratch("square.txt", "kind = polygon_region\nvertices = -0.4 -0.4; 0.4 -0.4; 0.4 0.4; -0.4 0.4\n");
    let csv = spec.with_file_name("square.csv");
    let (code, out, err) =
        run(bin().arg("verify").arg("--spec").arg(&spec).args(["--h", "0.08", "--proof-steps"]).arg("--csv").arg(&csv));
    assert_eq!(code, 0, "{out}{err}");
    assert!(out.contains("margin"));
    let text = fs::read_to_string(&csv).unwrap();
    assert_eq!(text.lines().count(), 2);
    assert!(text.lines().nth(1).unwrap().contains(",pass,"));
}

#[test]
fn solve_lists_the_zero_mode_first() {
    let spec = scratch("cap.txt", "kind = cap\ndim = 2\ngamma = pi/3\n");
    let (code, out, _) = run(bin().arg("solve").arg("--spec").arg(&spec).args(["--h", "0.1", "--count", "3"]));
    assert_eq!(code, 0);
    let rows: Vec<&str> = out.lines().collect();
    assert_eq!(rows[0], "index,mu,azimuthal_order,residual");
    assert_eq!(rows.len(), 5);
    assert!(rows[1].starts_with("0,0."));
}

#[test]
fn cap_only_sweep_writes_one_row_per_value() {
    let spec = scratch("sweep-cap.txt", "kind = cap\ndim = 3\ngamma = 1\n");
    let out_path = spec.with_file_name("sweep-cap.csv");
    let (code, _, err) = run(bin()
        .arg("sweep")
        .arg("--template")
        .arg(&spec)
        .args(["--param", "gamma", "--from", "0.5", "--to", "pi/2", "--steps", "4", "--cap-only"])
        .arg("--out")
        .arg(&out_path));
    assert_eq!(code, 0, "{err}");
    let text = fs::read_to_string(&out_path).unwrap();
    assert_eq!(text.lines().count(), 5);
    let last: Vec<&str> = text.lines().last().unwrap().split(',').collect();
    assert!(last.iter().any(|f| f.parse::<f64>().is_ok_and(|v| (v - 3.0).abs() < 1e-8)), "{last:?}");
}

#[test]
fn malformed_input_exits_with_two() {
    let spec = scratch("bad.txt", "kind = cap\ngamma = banana\n");
    let (code, _, err) = run(bin().arg("verify").arg("--spec").arg(&spec).args(["--h", "0.1"]));
    assert_eq!(code, 2);
    assert!(err.contains("error"));

    let (code, _, _) = run(bin().arg("verify").arg("--spec").arg("/nonexistent/spec.txt").args(["--h", "0.1"]));
    assert_eq!(code, 2);
}

#[test]
fn oversized_cap_is_an_input_error() {
    let spec = scratch("wide.txt", "kind = cap\ngamma = 2.0\n");
    let (code, _, _) = run(bin().arg("verify").arg("--spec").arg(&spec).args(["--h", "0.1"]));
    assert_eq!(code, 2);
}
