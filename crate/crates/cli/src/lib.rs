//! The `wavemap` command line: subcommand dispatch, TOML configuration and
//! atomic CSV/JSON/SVG output.
//!
//! Exit codes: 0 on success, 1 when a verification fails or a computation
//! cannot complete, 2 on a configuration error.

use std::ffi::OsString;
use std::path::PathBuf;

use clap::Parser;
use thiserror::Error;

mod args;
mod commands;
mod output;

pub use args::{Cli, Command, FileConfig};
pub use output::Output;

/// Seed used when neither the flags nor the configuration give one.
pub const DEFAULT_SEED: u64 = 7;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error(transparent)]
    Core(#[from] wavemap_core::Error),
    #[error("cannot write {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        use wavemap_core::Error as E;
        match self {
            CliError::Config(_) => 2,
            CliError::Core(E::Config(_) | E::Parse { .. } | E::CflViolation { .. }) => 2,
            _ => 1,
        }
    }
}

/// Result of a subcommand that ran to completion.
#[derive(Debug)]
pub struct Outcome {
    pub passed: bool,
    pub summary: String,
}

/// Settings shared by every subcommand after flags and file are merged.
#[derive(Debug)]
pub struct Context {
    pub seed: u64,
    pub tol: Option<f64>,
    pub out: Output,
}

impl Context {
    /// `--tol` if given, else the command's own default.
    pub fn tol_or(&self, default: f64) -> f64 {
        self.tol.unwrap_or(default)
    }
}

fn load_config(path: Option<&PathBuf>) -> Result<FileConfig, CliError> {
    let Some(path) = path else {
        return Ok(FileConfig::default());
    };
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
    toml::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
}

/// Parse the flags, merge the configuration file and run the subcommand.
pub fn execute(cli: Cli) -> Result<(Outcome, Output), CliError> {
    let mut file = load_config(cli.config.as_ref())?;
    let tol = cli.tol.or(file.tol);
    if let Some(t) = tol {
        if !(t.is_finite() && t > 0.0) {
            return Err(CliError::Config(format!("tolerance must be positive, got {t}")));
        }
    }
    let mut ctx = Context {
        seed: cli.seed.or(file.seed).unwrap_or(DEFAULT_SEED),
        tol,
        out: Output::new(cli.out.or(file.out.take()).unwrap_or_else(|| PathBuf::from("."))),
    };
    let outcome = match cli.command {
        Command::SolveCauchy(a) => commands::solve_cauchy(&mut ctx, a.overlay(file.solve_cauchy)),
        Command::BlowupScan(a) => commands::blowup_scan(&mut ctx, a.overlay(file.blowup_scan)),
        Command::Weierstrass(a) => commands::weierstrass(&mut ctx, a.overlay(file.weierstrass)),
        Command::Superpose(a) => commands::superpose(&mut ctx, a.overlay(file.superpose)),
        Command::Geodesics(a) => commands::geodesics(&mut ctx, a.overlay(file.geodesics)),
        Command::Curvature(a) => commands::curvature(&mut ctx, a.overlay(file.curvature)),
        Command::GoursatTable(a) => commands::goursat_table(&mut ctx, a.overlay(file.goursat_table)),
        Command::Simulate(a) => commands::simulate(&mut ctx, a.overlay(file.simulate)),
        Command::Figure(a) => commands::figure(&mut ctx, a.overlay(file.figure)),
        Command::VerifyAll(a) => commands::verify_all(&mut ctx, a.overlay(file.verify_all)),
    }?;
    Ok((outcome, ctx.out))
}

/// Entry point shared by the binary and the tests; returns the exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match execute(cli) {
        Ok((outcome, out)) => {
            println!("{}", outcome.summary);
            for p in out.written() {
                println!("wrote {}", p.display());
            }
            if outcome.passed {
                0
            } else {
                1
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
