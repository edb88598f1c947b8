//! `eks`: batch front end for the radial extended Kohn-Sham solver.

mod config;
mod output;
mod run;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser};

use config::{parse_config, Overrides, Subcommand};

#[derive(Debug, Parser)]
#[command(name = "eks", version, about = "Radial extended Kohn-Sham solver and checks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, clap::Subcommand)]
enum Command {
    /// Sample the structural hypotheses of an exchange-correlation functional.
    CheckXc(Common),
    /// Self-consistent ground state of the atom at trace lambda.
    SolveAtom(Common),
    /// The same problem without the nucleus.
    SolveInfinity(Common),
    /// Atom and problem at infinity over a list of traces.
    ScanLambda(Common),
    /// Two-electron problem for a gradient functional.
    SolveTwoElectron(Common),
    /// Re-run the estimate checks on a stored result.
    Verify {
        /// Result JSON written by another subcommand.
        input: PathBuf,
        #[command(flatten)]
        common: Common,
    },
}

#[derive(Debug, Args)]
struct Common {
    /// TOML configuration file.
    #[arg(long, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Functional id, e.g. lda-x+pz81 or pbe.
    #[arg(long, value_name = "ID")]
    functional: Option<String>,
    /// Nuclear charge.
    #[arg(short = 'Z', value_name = "INT", allow_negative_numbers = true)]
    z: Option<i64>,
    /// Trace of the density operator (electron pairs).
    #[arg(long, value_name = "FLOAT", allow_negative_numbers = true)]
    lambda: Option<f64>,
    /// Number of radial grid nodes.
    #[arg(long, value_name = "INT")]
    grid_n: Option<usize>,
    /// Radius of the grid box in bohr.
    #[arg(long, value_name = "FLOAT", allow_negative_numbers = true)]
    rmax: Option<f64>,
    /// SCF stopping threshold on the L1 density change.
    #[arg(long, value_name = "FLOAT", allow_negative_numbers = true)]
    tol_density: Option<f64>,
    /// Worker threads for parallel sections.
    #[arg(long, value_name = "INT")]
    jobs: Option<usize>,
    /// Result JSON path.
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,
    /// Also write two-column density and orbital files next to the result.
    #[arg(long)]
    dump_orbitals: bool,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let (sub, common, input) = match cli.command {
        Command::CheckXc(c) => (Subcommand::CheckXc, c, None),
        Command::SolveAtom(c) => (Subcommand::SolveAtom, c, None),
        Command::SolveInfinity(c) => (Subcommand::SolveInfinity, c, None),
        Command::ScanLambda(c) => (Subcommand::ScanLambda, c, None),
        Command::SolveTwoElectron(c) => (Subcommand::SolveTwoElectron, c, None),
        Command::Verify { input, common } => (Subcommand::Verify, common, Some(input)),
    };

    let text = match &common.config {
        Some(p) => match std::fs::read_to_string(p) {
            Ok(t) => t,
            Err(e) => {
                eprintln!("error: cannot read {}: {e}", p.display());
                return ExitCode::from(1);
            }
        },
        None => String::new(),
    };
    let flags = Overrides {
        functional: common.functional,
        z: common.z,
        lambda: common.lambda,
        grid_n: common.grid_n,
        rmax: common.rmax,
        tol_density: common.tol_density,
        jobs: common.jobs,
        out: common.out,
        dump_orbitals: common.dump_orbitals,
    };
    let config = match parse_config(sub, &text, &flags) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
    };

    let pool = match rayon::ThreadPoolBuilder::new().num_threads(config.jobs).build() {
        Ok(p) => p,
        Err(e) => {
            eprintln!("error: cannot start worker pool: {e}");
            return ExitCode::from(1);
        }
    };
    match pool.install(|| run::dispatch(&config, input.as_deref())) {
        Ok(run::Status::Ok) => ExitCode::SUCCESS,
        Ok(run::Status::NotConverged) => {
            eprintln!("error: not converged; partial result written");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
