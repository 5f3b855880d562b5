//! Command-line entry point: `gen`, `solve`, `roundtrip`, `eval` and `serve`.
//!
//! Exit codes are 0 on success, 1 when the work itself fails and 2 for
//! usage or configuration errors.

pub mod commands;
pub mod config;

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Parser, Subcommand};
use serde_json::{json, Value};

use config::GlobalConfig;

#[derive(Parser, Debug)]
#[command(
    name = "itinera",
    version,
    about = "Travel planning with a verified optimizer"
)]
pub struct Cli {
    /// TOML config file; flags override its values.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Print machine-readable JSON on stdout.
    #[arg(long, global = true)]
    pub json: bool,
    /// Random seed; overrides `seed` in the config.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Generate a dataset of requests, inventories and texts.
    Gen(commands::GenArgs),
    /// Solve one instance under one objective mode.
    Solve(commands::SolveArgs),
    /// Check that texts translate back to their requests.
    Roundtrip(commands::RoundtripArgs),
    /// Score a translator on a corpus.
    Eval(commands::EvalArgs),
    /// Run the HTTP service.
    Serve(commands::ServeArgs),
}

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Domain(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Domain(_) => 1,
        }
    }

    fn message(&self) -> &str {
        match self {
            CliError::Usage(m) | CliError::Domain(m) => m,
        }
    }
}

/// What a subcommand prints: `json` with `--json`, `text` otherwise.
pub struct Output {
    pub json: Value,
    pub text: String,
}

fn configure(cli: &Cli) -> Result<GlobalConfig, CliError> {
    let mut cfg = match &cli.config {
        Some(p) => GlobalConfig::load(p).map_err(|e| CliError::Usage(e.0))?,
        None => GlobalConfig::default(),
    };
    if cli.seed.is_some() {
        cfg.seed = cli.seed;
    }
    cfg.validate().map_err(|e| CliError::Usage(e.0))?;
    Ok(cfg)
}

fn dispatch(cli: &Cli) -> Result<Output, CliError> {
    let cfg = configure(cli)?;
    match &cli.command {
        Command::Gen(a) => commands::gen(&cfg, a),
        Command::Solve(a) => commands::solve(&cfg, a),
        Command::Roundtrip(a) => commands::roundtrip(&cfg, a),
        Command::Eval(a) => commands::eval(&cfg, a),
        Command::Serve(a) => commands::serve(&cfg, a),
    }
}

fn init_logging(cli: &Cli) {
    let level = match cli.command {
        Command::Serve(_) => tracing::Level::INFO,
        _ => tracing::Level::WARN,
    };
    let _ = tracing_subscriber::fmt()
        .with_writer(std::io::stderr)
        .with_max_level(level)
        .try_init();
}

/// Parses `args` (program name first), runs the subcommand and returns the
/// process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    init_logging(&cli);
    match dispatch(&cli) {
        Ok(out) => {
            // A closed stdout (e.g. piped into `head`) is not an error.
            let mut stdout = std::io::stdout().lock();
            let _ = if cli.json {
                writeln!(stdout, "{}", out.json)
            } else if out.text.is_empty() {
                Ok(())
            } else {
                writeln!(stdout, "{}", out.text)
            };
            0
        }
        Err(e) => {
            if cli.json {
                let body = json!({ "error": e.message(), "exit_code": e.exit_code() });
                let _ = writeln!(std::io::stdout(), "{body}");
            }
            eprintln!("error: {}", e.message());
            e.exit_code()
        }
    }
}
