//! `nonrecip` runs one experiment on a model file and writes plot-ready data.
//!
//! Exit codes: 0 success, 2 gauge violation, 3 degenerate input,
//! 4 schema or configuration error, 5 numerical failure.

mod commands;
mod output;
mod schema;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use nonrecip_core::Error;

use commands::{Command, Settings};

#[derive(Debug, Parser)]
#[command(name = "nonrecip", version, about = "Experiments on nonreciprocal tight-binding lattices")]
struct Args {
    /// Experiment to run.
    #[arg(value_enum)]
    command: Command,
    /// Model JSON file.
    #[arg(long)]
    model: PathBuf,
    /// Output directory, created if missing.
    #[arg(long)]
    out: PathBuf,
    /// Extra parameters, e.g. `--set K=1024`.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
}

#[derive(Debug)]
pub struct CliError {
    pub code: u8,
    pub message: String,
}

impl CliError {
    pub fn schema(message: String) -> Self {
        CliError { code: 4, message }
    }

    pub fn config(message: String) -> Self {
        CliError { code: 4, message }
    }

    pub fn numeric(message: String) -> Self {
        CliError { code: 5, message }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::Violated { .. } => 2,
            Error::Degenerate(_) | Error::PtBroken { .. } => 3,
            Error::Input(_)
            | Error::Unsupported(_)
            | Error::InsufficientSize { .. }
            | Error::NotSeparable
            | Error::SymmetryAbsent { .. } => 4,
            Error::Domain(_)
            | Error::NearExceptionalPoint { .. }
            | Error::NoConvergence { .. }
            | Error::NotPseudoHermitian { .. }
            | Error::AmbiguousPairing { .. }
            | Error::GaugeSingular { .. }
            | Error::BandTouching { .. } => 5,
        };
        CliError { code, message: e.to_string() }
    }
}

fn threads() -> Result<(), CliError> {
    let Ok(raw) = std::env::var("NONRECIP_THREADS") else { return Ok(()) };
    let n: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| CliError::config(format!("NONRECIP_THREADS must be a positive integer, got {raw:?}")))?;
    rayon::ThreadPoolBuilder::new().num_threads(n).build_global().map_err(|e| CliError::config(format!("thread pool: {e}")))
}

fn run(args: Args) -> Result<u8, CliError> {
    threads()?;
    let settings = Settings::parse(&args.set)?;
    let shown = args.model.display().to_string();
    let src = std::fs::read_to_string(&args.model).map_err(|e| CliError::config(format!("cannot read {shown}: {e}")))?;
    let model = schema::parse_model(&shown, &src)?;
    let out = output::Out::new(&args.out)?;
    commands::run(args.command, model, &settings, &out).map(|c| c as u8)
}

fn main() -> ExitCode {
    let args = match Args::try_parse() {
        Ok(a) => a,
        Err(e) => {
            let code = if e.use_stderr() { 4 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(args) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {}", e.message);
            ExitCode::from(e.code)
        }
    }
}
