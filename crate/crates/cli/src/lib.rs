//! Command-line front end: table verification, hyper-parameter tuning,
//! cross-validated evaluation on CSV data and Monte Carlo simulation.

pub mod config;
pub mod data;
pub mod error;
pub mod evaluate;
pub mod output;
pub mod simulate;
pub mod tune;
pub mod verify;

use std::ffi::OsString;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

pub use config::{RunArgs, RunConfig};
pub use error::{CliError, Result};

#[derive(Debug, Parser)]
#[command(name = "bopi", version, about = "Variable-width prediction intervals for loess")]
pub struct Cli {
    /// Worker threads [default: all cores].
    #[arg(long, env = "BOPI_THREADS", global = true)]
    pub threads: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check the tolerance/prediction containment tables.
    Verify {
        /// Report directory.
        #[arg(short, long, default_value = "bopi-verify")]
        out: PathBuf,
    },
    /// Tune the LHNPE hyper-parameters on a dataset.
    Tune(RunArgs),
    /// Compare interval methods by cross-validation on a dataset.
    Evaluate(RunArgs),
    /// Run the synthetic benchmark simulation.
    Simulate(RunArgs),
}

pub fn execute(cli: &Cli) -> Result<()> {
    if let Some(t) = cli.threads {
        if t == 0 {
            return Err(CliError::Usage("thread count must be positive".into()));
        }
        // Fails only if a pool already exists, which is harmless.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(t).build_global();
    }
    match &cli.command {
        Command::Verify { out } => verify::verify(out).map(|_| ()),
        Command::Tune(a) => tune::run(&RunConfig::load(a)?),
        Command::Evaluate(a) => evaluate::run(&RunConfig::load(a)?),
        Command::Simulate(a) => simulate::run(&RunConfig::load(a)?),
    }
}

/// Parses `args`, runs the command and maps the outcome to an exit code.
pub fn main_with<I, T>(args: I) -> ExitCode
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match execute(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
