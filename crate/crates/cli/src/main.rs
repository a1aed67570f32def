//! `bookforge` command-line driver. Each pipeline stage is a subcommand that
//! reads and writes files, so stages can be run, cached and resumed
//! independently.

mod cache;
mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use config::Settings;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] bookforge::Error),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("{0}: {1}")]
    Io(PathBuf, #[source] std::io::Error),
}

impl CliError {
    /// 2 for configuration and file problems, 3 when a query names no
    /// article, 4 when a prerequisite artifact is missing, 1 otherwise.
    pub fn exit_code(&self) -> u8 {
        use bookforge::Error as E;
        match self {
            CliError::Config(_) | CliError::Io(..) => 2,
            CliError::Core(e) => match e {
                E::NoSeedFound(_) => 3,
                E::MissingArtifact(_) => 4,
                E::Io { .. } | E::Config(_) | E::Parse { .. } | E::Schema(_) | E::Serde(_) | E::Csv(_) => 2,
                _ => 1,
            },
        }
    }
}

#[derive(Parser, Debug)]
#[command(name = "bookforge", version, about = "Assemble chaptered books from a linked corpus")]
struct Cli {
    /// Flat TOML file of configuration keys.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Recompute even when a cached artifact matches.
    #[arg(long, global = true)]
    force: bool,

    #[command(flatten)]
    settings: Settings,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug, Clone, Copy)]
enum Command {
    /// Validate a corpus and filter its gold books.
    Ingest,
    /// Write a synthetic corpus with planted gold books.
    Synth,
    /// Train the per-book models on gold books.
    Train,
    /// Build a book for a query with trained models.
    Generate,
    /// Leave-one-out evaluation against the training gold books.
    Evaluate,
    /// Summarize a report, or score a generated book against its gold book.
    Metrics,
}

fn init_threads() -> Result<(), CliError> {
    let Ok(value) = std::env::var("BOOKFORGE_THREADS") else {
        return Ok(());
    };
    let n: usize = value
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| CliError::Config(format!("BOOKFORGE_THREADS `{value}` is not a positive integer")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| CliError::Config(e.to_string()))
}

fn run(cli: Cli) -> Result<(), CliError> {
    init_threads()?;
    let file = match &cli.config {
        Some(path) => Settings::load(path)?,
        None => Settings::default(),
    };
    let settings = file.overlay(&cli.settings)?;
    let ctx = commands::Context {
        settings,
        force: cli.force,
    };
    match cli.command {
        Command::Ingest => commands::ingest(&ctx),
        Command::Synth => commands::synth(&ctx),
        Command::Train => commands::train(&ctx),
        Command::Generate => commands::generate(&ctx),
        Command::Evaluate => commands::evaluate(&ctx),
        Command::Metrics => commands::metrics(&ctx),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
