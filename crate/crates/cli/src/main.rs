//! `cheapmix` batch front end.

mod commands;
mod manifest;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;

use commands::Command;

const FORMATS: &str = "\
Every run writes its outputs into the output directory together with
manifest.json, which records the subcommand, its fully resolved
configuration, the seed, the tool version and the SHA-256 digest of each
output file. `cheapmix replay --manifest <file>` reruns a manifest and
reproduces the outputs byte for byte.

CSV files have a header row; floating-point cells carry 17 significant
digits. JSON floats use the shortest representation that parses back to
the same value.

Exit status: 0 on success, 2 for invalid flags, inputs or configuration,
3 for numeric failures such as ill-conditioned frames.";

#[derive(Debug, Parser)]
#[command(name = "cheapmix", version, about = "Extreme-point geometry of admixture models", after_long_help = FORMATS)]
struct Cli {
    /// Worker threads for data-parallel loops; outputs do not depend on it.
    #[arg(long, global = true)]
    threads: Option<usize>,

    /// Output directory.
    #[arg(long, global = true, env = "CHEAPMIX_OUT_DIR", default_value = "cheapmix-out")]
    out: PathBuf,

    #[command(subcommand)]
    command: Command,
}

/// Failure classes, mapped to exit codes.
#[derive(Debug)]
pub enum CliError {
    Config(String),
    Numeric(String),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            CliError::Numeric(_) => 3,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Config(m) => write!(f, "configuration error: {m}"),
            CliError::Numeric(m) => write!(f, "numeric failure: {m}"),
        }
    }
}

impl From<cheapmix::Error> for CliError {
    fn from(e: cheapmix::Error) -> Self {
        if e.is_numeric() {
            CliError::Numeric(e.to_string())
        } else {
            CliError::Config(e.to_string())
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Config(e.to_string())
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::Config(e.to_string())
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    if let Some(n) = cli.threads {
        if n == 0 {
            return Err(CliError::Config("--threads must be positive".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Config(e.to_string()))?;
    }
    let command = match cli.command {
        Command::Replay(r) => manifest::load(&r.manifest)?,
        c => c,
    };
    let output = commands::execute(&command)?;
    if let Some(text) = &output.stdout {
        print!("{text}");
    }
    manifest::write(&cli.out, &command, &output)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("cheapmix: {e}");
            ExitCode::from(e.code())
        }
    }
}
