mod args;
mod campaign;
mod commands;
mod report;

use args::{Cli, Command};
use clap::Parser;
use std::fmt;
use std::process::ExitCode;

/// Usage errors exit with 1, runtime failures with 2.
#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Runtime(String),
}

impl CliError {
    /// Prefix the message with the run it came from.
    pub fn context(self, run: &str) -> CliError {
        match self {
            CliError::Usage(m) => CliError::Usage(format!("run {:?}: {}", run, m)),
            CliError::Runtime(m) => CliError::Runtime(format!("run {:?}: {}", run, m)),
        }
    }

    fn code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Runtime(_) => 2,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "usage error: {}", m),
            CliError::Runtime(m) => write!(f, "error: {}", m),
        }
    }
}

/// Honour MBOSM_THREADS; results never depend on it.
fn init_threads() -> Result<(), CliError> {
    let Ok(raw) = std::env::var("MBOSM_THREADS") else {
        return Ok(());
    };
    let n: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| CliError::Usage(format!("MBOSM_THREADS={:?} must be a positive integer", raw)))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| CliError::Runtime(e.to_string()))
}

fn run(cli: Cli) -> Result<(), CliError> {
    init_threads()?;
    match &cli.command {
        Command::Gen(a) => commands::gen(a),
        Command::Validate { file } => commands::validate(file),
        Command::Lp { file } => commands::lp(file),
        Command::Simulate(a) => commands::simulate(a),
        Command::Opt(a) => commands::opt(a),
        Command::Bbins(a) => commands::bbins(a),
        Command::Bounds(a) => commands::bounds(a),
        Command::Campaign { manifest } => campaign::campaign(manifest),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("mbosm: {}", e);
            ExitCode::from(e.code())
        }
    }
}
