use std::fs;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use sphere_neumann::cap_spectrum::{solve_mode, CapProblem};
use sphere_neumann::mesh::DomainSpec;
use sphere_neumann::verifier::{
    cap_sweep, domain_spectrum, sweep, verify_domain, write_cap_csv, write_sweep_csv, VerifyOptions,
};
use sphere_neumann::Error;

#[derive(Parser)]
#[command(name = "sphere-neumann", version, about = "Neumann eigenvalues on spherical domains")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Radial eigenvalues mu_{l,k} of a geodesic cap.
    CapSpectrum {
        #[arg(long)]
        dim: usize,
        #[arg(long, value_parser = parse_real)]
        gamma: f64,
        /// Angular degree; all of 0..=2 when omitted.
        #[arg(long)]
        l: Option<usize>,
        #[arg(long, default_value_t = 3)]
        kmax: usize,
    },
    /// Lowest Neumann eigenvalues of a domain by finite elements.
    Solve {
        #[arg(long)]
        spec: PathBuf,
        #[arg(long)]
        h: f64,
        #[arg(long, default_value_t = 4)]
        count: usize,
        #[arg(long, default_value_t = 0)]
        refinements: usize,
        #[arg(long)]
        export_mesh: Option<PathBuf>,
    },
    /// Checks the harmonic-mean inequality on a domain.
    Verify {
        #[arg(long)]
        spec: PathBuf,
        #[arg(long)]
        h: f64,
        #[arg(long, default_value_t = 0)]
        refinements: usize,
        #[arg(long)]
        proof_steps: bool,
        /// Also write the report as a one-row CSV.
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Verifies a family of domains along one parameter.
    Sweep {
        #[arg(long)]
        template: PathBuf,
        #[arg(long)]
        param: String,
        #[arg(long, value_parser = parse_real)]
        from: f64,
        #[arg(long, value_parser = parse_real)]
        to: f64,
        #[arg(long)]
        steps: usize,
        #[arg(long, default_value_t = 0.04)]
        h: f64,
        #[arg(long, default_value_t = 0)]
        refinements: usize,
        #[arg(long)]
        proof_steps: bool,
        /// Sweep only mu_1 of the cap (template must be a cap, param gamma).
        #[arg(long)]
        cap_only: bool,
        #[arg(long)]
        out: PathBuf,
    },
}

fn parse_real(s: &str) -> Result<f64, String> {
    sphere_neumann::mesh::parse_real(s).ok_or_else(|| format!("not a number: `{s}`"))
}

enum Failure {
    Input(String),
    Solver(String),
    Margin,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        if e.is_solver_failure() || matches!(e, Error::InvalidMesh(_)) {
            Failure::Solver(e.to_string())
        } else {
            Failure::Input(e.to_string())
        }
    }
}

fn read_spec(path: &PathBuf) -> Result<DomainSpec, Failure> {
    let text = fs::read_to_string(path).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))?;
    Ok(DomainSpec::parse(&text)?)
}

fn write_file(path: &PathBuf, bytes: &[u8]) -> Result<(), Failure> {
    fs::write(path, bytes).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))
}

fn run(cli: Cli) -> Result<(), Failure> {
    let mut out = std::io::stdout().lock();
    match cli.command {
        Command::CapSpectrum { dim, gamma, l, kmax } => {
            writeln!(out, "l,k,mu").ok();
            let ls: Vec<usize> = l.map_or_else(|| (0..=2).collect(), |l| vec![l]);
            for l in ls {
                for pair in solve_mode(&CapProblem::new(dim, gamma, l)?, kmax)? {
                    writeln!(out, "{l},{},{:.16e}", pair.k, pair.mu).ok();
                }
            }
        }
        Command::Solve { spec, h, count, refinements, export_mesh } => {
            let spec = read_spec(&spec)?;
            let s = domain_spectrum(&spec, h, refinements, count)?;
            writeln!(out, "index,mu,azimuthal_order,residual").ok();
            writeln!(out, "0,{:.16e},0,{:.16e}", 0.0, 0.0).ok();
            for (i, m) in s.modes.iter().enumerate() {
                writeln!(out, "{},{:.16e},{},{:.16e}", i + 1, m.value, m.m, m.residual).ok();
            }
            if let Some(path) = export_mesh {
                write_file(&path, s.mesh.to_text().as_bytes())?;
            }
        }
        Command::Verify { spec, h, refinements, proof_steps, csv } => {
            let spec = read_spec(&spec)?;
            let report = verify_domain(&spec, &VerifyOptions { h, refinements, proof_steps })?;
            write!(out, "{}", report.to_key_values()).ok();
            if let Some(path) = csv {
                let row = sphere_neumann::verifier::SweepRow { index: 0, value: h, result: Ok(report.clone()) };
                let mut buf = Vec::new();
                write_sweep_csv(&[row], "h", report.dim, &mut buf)?;
                write_file(&path, &buf)?;
            }
            let proof_ok = report.proof.as_ref().is_none_or(|p| p.all_hold());
            if !report.passed() || !proof_ok {
                return Err(Failure::Margin);
            }
        }
        Command::Sweep { template, param, from, to, steps, h, refinements, proof_steps, cap_only, out: path } => {
            let spec = read_spec(&template)?;
            if steps == 0 {
                return Err(Failure::Input("steps must be at least 1".into()));
            }
            let grid: Vec<f64> = (0..steps)
                .map(|k| if steps == 1 { from } else { from + (to - from) * k as f64 / (steps - 1) as f64 })
                .collect();
            let mut buf = Vec::new();
            if cap_only {
                let DomainSpec::Cap { dim, .. } = spec else {
                    return Err(Failure::Input("--cap-only needs a cap template".into()));
                };
                if param != "gamma" {
                    return Err(Failure::Input("--cap-only sweeps gamma".into()));
                }
                let rows = cap_sweep(dim, &grid);
                write_cap_csv(&rows, &mut buf)?;
                write_file(&path, &buf)?;
                let failed = rows.iter().filter(|r| r.result.is_err()).count();
                writeln!(out, "rows = {}\nerrors = {failed}", rows.len()).ok();
                if failed == rows.len() {
                    return Err(Failure::Solver("every row failed".into()));
                }
            } else {
                let rows = sweep(&spec, &param, &grid, &VerifyOptions { h, refinements, proof_steps });
                write_sweep_csv(&rows, &param, spec.dim(), &mut buf)?;
                write_file(&path, &buf)?;
                let errors = rows.iter().filter(|r| r.result.is_err()).count();
                let below = rows.iter().filter(|r| r.result.as_ref().is_ok_and(|r| !r.passed())).count();
                writeln!(out, "rows = {}\nerrors = {errors}\nbelow_tolerance = {below}", rows.len()).ok();
                if below > 0 {
                    return Err(Failure::Margin);
                }
                if errors == rows.len() {
                    return Err(Failure::Solver("every row failed".into()));
                }
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Margin) => ExitCode::from(1),
        Err(Failure::Input(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(2)
        }
        Err(Failure::Solver(m)) => {
            eprintln!("solver failure: {m}");
            ExitCode::from(3)
        }
    }
}
