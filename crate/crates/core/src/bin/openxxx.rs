use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use openxxx_core::harness::output::{emit_results, write_report};
use openxxx_core::harness::{run_bethe_check, run_bethe_solve, run_identity_suite, run_spectrum, ExperimentConfig};
use openxxx_core::Error;

#[derive(Parser)]
#[command(name = "openxxx", version, about = "Open XXX gl(n) chain: identities, spectra and Bethe roots")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// JSON experiment configuration
    #[arg(long)]
    config: PathBuf,
    /// Output directory for report.json (and spectrum.csv)
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Overrides the seed in the configuration
    #[arg(long)]
    seed: Option<u64>,
    /// Overrides the primary tolerance of the subcommand
    #[arg(long)]
    tol: Option<f64>,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate every algebraic identity at seeded generic points
    VerifyIdentities(Common),
    /// Solve all sectors and match the Bethe spectrum against exact diagonalization
    Spectrum(Common),
    /// Solve the Bethe equations sector by sector
    BetheSolve(Common),
    /// Check the roots given in the configuration
    BetheCheck(Common),
}

enum Outcome {
    Pass,
    Fail,
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Config(_) | Error::Io { .. } => 2,
        _ => 1,
    }
}

fn load(common: &Common) -> Result<openxxx_core::harness::Experiment, Error> {
    if let Some(t) = common.tol {
        if !(t > 0.0 && t.is_finite()) {
            return Err(Error::Config(format!("--tol {t} must be positive")));
        }
    }
    ExperimentConfig::load(Path::new(&common.config))?.resolve(common.seed)
}

fn run(cmd: &Command) -> Result<Outcome, Error> {
    let verdict = |p: bool| if p { Outcome::Pass } else { Outcome::Fail };
    match cmd {
        Command::VerifyIdentities(c) => {
            let mut exp = load(c)?;
            if let Some(t) = c.tol {
                exp.tolerances.identity = t;
            }
            let report = run_identity_suite(&exp);
            for check in &report.checks {
                println!("{:<32} {:>10.3e}  {:?}", check.name, check.max_residual, check.status);
            }
            write_report(&report, &c.out)?;
            Ok(verdict(report.passed))
        }
        Command::Spectrum(c) => {
            let mut exp = load(c)?;
            if let Some(t) = c.tol {
                exp.tolerances.r#match = t;
            }
            let run = run_spectrum(&exp)?;
            let r = &run.report;
            let solutions: usize = r.sectors.iter().map(|s| s.solutions.len()).sum();
            println!("dim {}  levels {}  solutions {}  completeness {:.4}", r.quantum_dim, r.ed.len(), solutions, r.completeness);
            for w in &r.warnings {
                println!("warning: {w}");
            }
            emit_results(r, &run.curves, &c.out)?;
            Ok(verdict(r.passed))
        }
        Command::BetheSolve(c) => {
            let mut exp = load(c)?;
            if let Some(t) = c.tol {
                exp.tolerances.residual = t;
            }
            let report = run_bethe_solve(&exp)?;
            for s in &report.sectors {
                println!("sector {:?}: {} solutions", s.sector, s.solutions.len());
            }
            write_report(&report, &c.out)?;
            Ok(verdict(report.passed))
        }
        Command::BetheCheck(c) => {
            let mut exp = load(c)?;
            if let Some(t) = c.tol {
                exp.tolerances.eigenvector = t;
            }
            let report = run_bethe_check(&exp)?;
            println!(
                "residual {:.3e}  residue {:.3e}  eigen {:.3e}",
                report.bethe_residual, report.residue.max_relative, report.eigen.max_residual
            );
            write_report(&report, &c.out)?;
            Ok(verdict(report.passed))
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli.command) {
        Ok(Outcome::Pass) => ExitCode::SUCCESS,
        Ok(Outcome::Fail) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
