//! Acceptance gate: runs each criterion at its stated tolerance and prints
//! one PASS/FAIL line per criterion. Exits non-zero if any criterion fails.

mod common;

use std::f64::consts::PI;
use std::time::Instant;

use sphere_neumann::cap_spectrum::{
    cap_profile, check_lemma, fitted_cubic_coefficient, frobenius_coefficient, mu1_cap, solve_mode, CapProblem,
};
use sphere_neumann::fem::{
    angular_energy_fraction, assemble_s2, assemble_s3_axisym, neumann_spectrum, neumann_spectrum_dense, AssembledSystem,
};
use sphere_neumann::mesh::{build_meridian_mesh, build_planar_mesh, refine, DomainSpec};
use sphere_neumann::verifier::{
    corpus, sweep, verify_domain, write_sweep_csv, Expectation, InequalityReport, VerifyOptions,
};

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

fn mu11(dim: usize, gamma: f64) -> f64 {
    solve_mode(&CapProblem::new(dim, gamma, 1).unwrap(), 1).unwrap()[0].mu
}

fn hemisphere_exactness() -> Outcome {
    let t = Instant::now();
    let mut worst: f64 = 0.0;
    for n in [2usize, 3, 4, 6, 10] {
        worst = worst.max((mu1_cap(n, PI / 2.0).unwrap().value - n as f64).abs());
    }
    let secs = t.elapsed().as_secs_f64();
    outcome(worst < 1e-8 && secs < 1.0, format!("max |mu_1 - N| = {worst:.2e}, {secs:.2} s"))
}

fn hemisphere_zonal() -> Outcome {
    let mut worst: f64 = 0.0;
    let mut below = true;
    for (n, expect) in [(2usize, 6.0), (3, 8.0)] {
        let zonal = solve_mode(&CapProblem::new(n, PI / 2.0, 0).unwrap(), 2).unwrap()[1].mu;
        worst = worst.max((zonal - expect).abs());
        below &= mu11(n, PI / 2.0) < zonal;
    }
    outcome(worst < 1e-7 && below, format!("max |mu_02 - exact| = {worst:.2e}, mu_11 below mu_02: {below}"))
}

fn oracle_agreement() -> Outcome {
    let mut worst: f64 = 0.0;
    for dim in [2usize, 3] {
        for gamma in [PI / 6.0, PI / 4.0, PI / 3.0] {
            let oracle = common::radial_fd_richardson(dim, gamma, 1, 1, 4000);
            worst = worst.max(rel(mu11(dim, gamma), oracle));
        }
    }
    outcome(worst < 1e-6, format!("max relative deviation from the finite-difference oracle {worst:.2e}"))
}

fn cap_properties() -> Outcome {
    let mut decreasing = true;
    let mut above = true;
    let mut slope_positive = true;
    for dim in [2usize, 3] {
        let mut prev = f64::INFINITY;
        for k in 1..=50 {
            let gamma = 0.1 + (PI / 2.0 - 0.1) * k as f64 / 50.0;
            let mu = mu1_cap(dim, gamma).unwrap().value;
            decreasing &= mu < prev;
            prev = mu;
            if k < 50 {
                above &= mu > dim as f64;
            }
            let g = solve_mode(&CapProblem::new(dim, gamma, 1).unwrap(), 1).unwrap().remove(0);
            let n = g.y_prime_values.len();
            slope_positive &= g.y_prime_values[..n - 1].iter().all(|&d| d > 0.0);
        }
    }
    outcome(
        decreasing && above && slope_positive,
        format!("strictly decreasing: {decreasing}, above N: {above}, g' > 0: {slope_positive}"),
    )
}

fn lemma() -> Outcome {
    let mut ok = true;
    let mut worst_fit: f64 = 0.0;
    let mut notes = Vec::new();
    for dim in [2usize, 3] {
        for gamma in [PI / 6.0, PI / 4.0, PI / 3.0, PI / 2.0] {
            let profile = cap_profile(dim, gamma).unwrap();
            let r = check_lemma(&profile, dim, profile.mu());
            if gamma < PI / 2.0 {
                ok &= r.max_w < 0.0 && r.max_ratio_step < 0.0;
            } else {
                ok &= r.max_w.abs() < 1e-10 && r.max_ratio_step.abs() < 1e-10;
            }
            let fit = fitted_cubic_coefficient(&profile.profile);
            worst_fit = worst_fit.max((fit - r.frobenius_a).abs());
        }
    }
    let a_half = frobenius_coefficient(mu1_cap(2, PI / 2.0).unwrap().value, 2);
    let exact = (a_half - 1.0 / 6.0).abs() < 1e-12;
    if !exact {
        notes.push(format!("a(N=2, pi/2) = {a_half}"));
    }
    outcome(
        ok && worst_fit < 1e-4 && exact,
        format!(
            "W and G/sin signs ok: {ok}, max |a - fitted| = {worst_fit:.2e}, a = 1/6 at the hemisphere: {exact} {}",
            notes.join(" ")
        ),
    )
}

fn fem_convergence() -> Outcome {
    let t = Instant::now();
    let exact = mu11(2, PI / 3.0);
    let mut mesh = build_planar_mesh(&DomainSpec::Cap { dim: 2, gamma: PI / 3.0 }, 0.08).unwrap();
    let mut hs = Vec::new();
    let mut errs = Vec::new();
    let mut gap_at_002 = f64::NAN;
    for level in 0..4 {
        if level > 0 {
            mesh = refine(&mesh);
        }
        let s = neumann_spectrum(&assemble_s2(&mesh).unwrap(), 3).unwrap();
        hs.push(mesh.h);
        errs.push(rel(s.values[1], exact));
        if level == 2 {
            gap_at_002 = (s.values[2] - s.values[1]).abs() / s.values[1];
        }
    }
    let (lx, ly): (Vec<f64>, Vec<f64>) = hs.iter().zip(&errs).map(|(h, e)| (h.ln(), e.ln())).unzip();
    let mx = lx.iter().sum::<f64>() / 4.0;
    let my = ly.iter().sum::<f64>() / 4.0;
    let order = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum::<f64>()
        / lx.iter().map(|x| (x - mx).powi(2)).sum::<f64>();
    let secs = t.elapsed().as_secs_f64();
    outcome(
        (order - 2.0).abs() <= 0.3 && errs[2] < 1e-3 && gap_at_002 < 1e-3 && secs < 60.0,
        format!(
            "order {order:.3}, errors {:?}, error at h=0.02 {:.2e}, gap {gap_at_002:.2e}, {secs:.1} s",
            errs.iter().map(|e| format!("{e:.2e}")).collect::<Vec<_>>(),
            errs[2]
        ),
    )
}

fn s3_cross_check() -> Outcome {
    let gamma = PI / 3.0;
    let mu_02 = solve_mode(&CapProblem::new(3, gamma, 0).unwrap(), 2).unwrap()[1].mu;
    let mu_11 = mu11(3, gamma);
    let mesh = build_meridian_mesh(&DomainSpec::Cap { dim: 3, gamma }, 0.02).unwrap();
    let m0 = assemble_s3_axisym(&mesh, 0).unwrap();
    let s0 = neumann_spectrum(&m0, 5).unwrap();
    // the zonal mode carries (almost) no phi-energy
    let zonal = (1..s0.values.len())
        .filter(|&i| angular_energy_fraction(&mesh, &m0, &s0.vectors[i]) < 1e-2)
        .map(|i| s0.values[i])
        .next();
    let s1 = neumann_spectrum(&assemble_s3_axisym(&mesh, 1).unwrap(), 1).unwrap();
    let e1 = rel(s1.values[0], mu_11);
    match zonal {
        Some(z) => {
            let e0 = rel(z, mu_02);
            outcome(e0 < 1e-3 && e1 < 1e-3, format!("m=0 zonal vs mu_02: {e0:.2e}, m=1 vs mu_11: {e1:.2e}"))
        }
        None => outcome(false, "no zonal mode among the lowest m=0 values".into()),
    }
}

fn corpus_reports() -> (Vec<(String, Expectation, Result<InequalityReport, String>)>, f64) {
    let t = Instant::now();
    let opts = VerifyOptions { h: 0.04, refinements: 1, proof_steps: true };
    let out = corpus()
        .into_iter()
        .map(|e| {
            let r = verify_domain(&e.spec, &opts).map_err(|err| err.to_string());
            (e.name, e.expect, r)
        })
        .collect();
    (out, t.elapsed().as_secs_f64())
}

fn main_theorem(reports: &[(String, Expectation, Result<InequalityReport, String>)], secs: f64) -> Outcome {
    let mut bad = Vec::new();
    let mut margin_of = std::collections::HashMap::new();
    for (name, expect, r) in reports {
        match r {
            Err(e) => bad.push(format!("{name}: {e}")),
            Ok(r) => {
                margin_of.insert(name.clone(), r.margin);
                let ok = r.margin >= -1e-3
                    && match expect {
                        Expectation::Equality => r.margin.abs() <= 1e-3,
                        Expectation::Strict => r.margin > 0.0,
                    };
                if !ok {
                    bad.push(format!("{name}: margin {:.3e}", r.margin));
                }
            }
        }
    }
    let family: Vec<f64> = ["perturbed cap eps2=0.15", "perturbed cap eps2=0.08", "perturbed cap eps2=0.04"]
        .iter()
        .filter_map(|n| margin_of.get(*n).copied())
        .collect();
    let shrinking = family.len() == 3 && family[0] > family[1] && family[1] > family[2] && family[2] > 0.0;
    if !shrinking {
        bad.push(format!("eps2 family margins {family:?} do not shrink"));
    }
    if secs >= 300.0 {
        bad.push(format!("runtime {secs:.0} s"));
    }
    let worst_cap = reports
        .iter()
        .filter(|r| r.1 == Expectation::Equality)
        .filter_map(|r| r.2.as_ref().ok())
        .map(|r| r.margin.abs())
        .fold(0.0, f64::max);
    let least_strict = reports
        .iter()
        .filter(|r| r.1 == Expectation::Strict)
        .filter_map(|r| r.2.as_ref().ok())
        .map(|r| r.margin)
        .fold(f64::INFINITY, f64::min);
    outcome(
        bad.is_empty(),
        format!(
            "{} domains, max cap |margin| {worst_cap:.2e}, min non-cap margin {least_strict:.3e}, eps2 margins {:?}, {secs:.1} s {}",
            reports.len(),
            family.iter().map(|m| format!("{m:.3e}")).collect::<Vec<_>>(),
            bad.join("; ")
        ),
    )
}

fn proof_steps(reports: &[(String, Expectation, Result<InequalityReport, String>)]) -> Outcome {
    let mut bad = Vec::new();
    let mut worst_balance: f64 = 0.0;
    let mut worst_cap_equality: f64 = 0.0;
    for (name, expect, r) in reports {
        let Ok(r) = r else {
            bad.push(format!("{name}: no report"));
            continue;
        };
        let Some(p) = &r.proof else {
            bad.push(format!("{name}: no proof record"));
            continue;
        };
        if !p.all_hold() {
            bad.push(format!("{name}: s20 {:.2e} s21 {:.2e} s22 {:.2e}", p.step20_pointwise, p.step21, p.step22));
        }
        if *expect == Expectation::Equality {
            worst_cap_equality =
                worst_cap_equality.max((p.step21 / p.cap_g2_over_sin2).abs()).max((p.step22 / p.cap_g2).abs());
            if !p.cap_equality() {
                bad.push(format!("{name}: cap sides differ"));
            }
        }
        if r.dim == 2 {
            worst_balance = worst_balance.max(p.balancing_residual / p.balancing_scale);
            if !p.balanced() {
                bad.push(format!("{name}: balancing residual {:.2e}", p.balancing_residual));
            }
        }
    }
    outcome(
        bad.is_empty(),
        format!(
            "max relative cap mismatch {worst_cap_equality:.2e}, max balancing residual / scale {worst_balance:.2e} {}",
            bad.join("; ")
        ),
    )
}

fn hygiene() -> Outcome {
    let mut systems: Vec<(String, AssembledSystem)> = Vec::new();
    for e in corpus() {
        match e.spec.dim() {
            2 => {
                let mesh = build_planar_mesh(&e.spec, 0.1).unwrap();
                systems.push((e.name.clone(), assemble_s2(&mesh).unwrap()));
            }
            _ => {
                let mesh = build_meridian_mesh(&e.spec, 0.1).unwrap();
                for m in 0..3 {
                    systems.push((format!("{} m={m}", e.name), assemble_s3_axisym(&mesh, m).unwrap()));
                }
            }
        }
    }
    let mut worst_diff: f64 = 0.0;
    let mut worst_res: f64 = 0.0;
    let mut bad = Vec::new();
    let mut checked = 0;
    for (name, sys) in &systems {
        if sys.n > 3000 {
            continue;
        }
        checked += 1;
        let count = 4;
        match (neumann_spectrum(sys, count), neumann_spectrum_dense(sys, count)) {
            (Ok(a), Ok(b)) => {
                for (x, y) in a.values.iter().zip(&b.values) {
                    let d = if x.abs() < 1e-9 && y.abs() < 1e-9 { 0.0 } else { rel(*x, *y) };
                    worst_diff = worst_diff.max(d);
                }
                worst_res = a.residuals.iter().chain(&b.residuals).fold(worst_res, |w, r| w.max(*r));
            }
            (a, b) => bad.push(format!("{name}: {:?} / {:?}", a.err(), b.err())),
        }
    }
    // repeated sweeps must serialize identically
    let template = DomainSpec::PerturbedCap { gamma: PI / 3.0, amplitudes: vec![(2, 0.1)] };
    let opts = VerifyOptions { h: 0.08, refinements: 0, proof_steps: true };
    let grid = [0.0, 0.05, 0.1, 0.15];
    let csv = || {
        let rows = sweep(&template, "eps2", &grid, &opts);
        let mut buf = Vec::new();
        write_sweep_csv(&rows, "eps2", 2, &mut buf).unwrap();
        buf
    };
    let identical = csv() == csv();
    outcome(
        bad.is_empty() && worst_diff < 1e-8 && worst_res <= 1e-8 && identical,
        format!(
            "{checked} systems, max dense/shift-invert difference {worst_diff:.2e}, max residual {worst_res:.2e}, identical CSV: {identical} {}",
            bad.join("; ")
        ),
    )
}

fn main() {
    let mut results: Vec<(u32, &str, Outcome)> = Vec::new();
    results.push((1, "hemisphere exactness", hemisphere_exactness()));
    results.push((2, "hemisphere second zonal mode", hemisphere_zonal()));
    results.push((3, "oracle agreement", oracle_agreement()));
    results.push((4, "cap monotonicity properties", cap_properties()));
    results.push((5, "profile lemma", lemma()));
    results.push((6, "FEM convergence on the S2 cap", fem_convergence()));
    results.push((7, "S3 axisymmetric cross-check", s3_cross_check()));
    let (reports, secs) = corpus_reports();
    results.push((8, "inequality over the corpus", main_theorem(&reports, secs)));
    results.push((9, "proof-step suite", proof_steps(&reports)));
    results.push((10, "solver hygiene", hygiene()));
    let mut failed = 0;
    for (k, name, o) in &results {
        println!("criterion {k:>2} {}: {name} -- {}", if o.pass { "PASS" } else { "FAIL" }, o.detail);
        failed += usize::from(!o.pass);
    }
    println!("acceptance: {} passed, {failed} failed", results.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
