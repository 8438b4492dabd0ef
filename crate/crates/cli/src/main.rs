use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use gamma_finite::app::{run_decompose, run_table, run_verify, RunConfig, RunOutcome};
use gamma_finite::{Error, DEFAULT_TOL};

/// Verify gamma factor identities for general linear groups over small
/// prime fields.
#[derive(Parser)]
#[command(name = "gamma-finite", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Field size (prime, at most 7).
    #[arg(long)]
    q: u8,
    /// Matrix rank n (gamma factors pair rank n with rank n-1).
    #[arg(long)]
    n: usize,
    /// Seed for the randomized decomposition.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Numerical tolerance for the verification.
    #[arg(long, default_value_t = DEFAULT_TOL)]
    tol: f64,
    /// Directory for cached decompositions (also settable via
    /// GAMMA_FINITE_CACHE).
    #[arg(long)]
    cache_dir: Option<PathBuf>,
    /// Write the JSON report to this file as well as stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Permit builds whose induced-space dimension exceeds 300.
    #[arg(long)]
    allow_slow: bool,
    /// Use the conjugate additive character exp(-2*pi*i*x/q).
    #[arg(long)]
    psi_conjugate: bool,
}

impl Common {
    fn config(&self) -> RunConfig {
        RunConfig {
            q: self.q,
            n: self.n,
            seed: self.seed,
            tolerance: self.tol,
            cache_dir: self.cache_dir.clone(),
            out: self.out.clone(),
            allow_slow: self.allow_slow,
            psi_conjugate: self.psi_conjugate,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Compare the two gamma factor constructions over all applicable
    /// representation pairs.
    Verify(Common),
    /// Emit the component inventory together with the verification
    /// records.
    Table(Common),
    /// Decompose the induced space at rank n and list its components.
    Decompose(Common),
}

fn exit_code_for(err: &Error) -> u8 {
    match err {
        Error::UnsupportedField(_)
        | Error::BudgetExceeded { .. }
        | Error::RankMismatch { .. }
        | Error::Cache(_) => 2,
        _ => 1,
    }
}

fn describe(err: &Error) -> String {
    match err {
        Error::UnsupportedField(q) => format!("q must be prime <= 7 (got {q})"),
        Error::BudgetExceeded { order, cap } => format!(
            "configuration exceeds the compute budget (group order {order}, cap {cap}); \
             use --allow-slow only for supported sizes"
        ),
        other => other.to_string(),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (cfg, result): (RunConfig, gamma_finite::Result<RunOutcome>) = match &cli.command {
        Command::Verify(c) => {
            let cfg = c.config();
            let r = run_verify(&cfg);
            (cfg, r)
        }
        Command::Table(c) => {
            let cfg = c.config();
            let r = run_table(&cfg);
            (cfg, r)
        }
        Command::Decompose(c) => {
            let cfg = c.config();
            let r = run_decompose(&cfg);
            (cfg, r)
        }
    };
    match result {
        Ok(outcome) => {
            print!("{}", outcome.report);
            if outcome.failures > 0 {
                eprintln!(
                    "{} pair(s) exceeded tolerance {}",
                    outcome.failures, cfg.tolerance
                );
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            }
        }
        Err(err) => {
            eprintln!("error: {}", describe(&err));
            ExitCode::from(exit_code_for(&err))
        }
    }
}
