//! Scenario runner for the `liouville` crate.
//!
//! Configuration is layered: built-in defaults, then an optional TOML file
//! (`--config`), then `LIOUVILLE_OUT_DIR` / `LIOUVILLE_THREADS`, then flags.
//! Every run writes its CSV outputs, the resolved `config.toml` and a
//! `manifest.json` into the output directory.
//!
//! Exit codes: 0 success, 1 a validation check failed, 2 numerical guard
//! abort, 64 usage or configuration error, 70 other runtime failure,
//! 74 I/O failure.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::path::Path;

use clap::Parser;

pub mod args;
pub mod commands;
pub mod config;
pub mod manifest;
pub mod output;

use args::{Cli, Command};
use config::{apply_env, parse_config, ScenarioConfig};

pub const EXIT_OK: i32 = 0;
pub const EXIT_VALIDATION: i32 = 1;
pub const EXIT_GUARD: i32 = 2;
pub const EXIT_USAGE: i32 = 64;
pub const EXIT_SOFTWARE: i32 = 70;
pub const EXIT_IO: i32 = 74;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Core(#[from] liouville::Error),
    #[error("i/o: {0}")]
    Io(String),
    #[error("internal: {0}")]
    Internal(String),
}

impl CliError {
    pub fn io(path: &Path, e: std::io::Error) -> Self {
        CliError::Io(format!("{}: {e}", path.display()))
    }

    pub fn exit_code(&self) -> i32 {
        use liouville::Error as E;
        match self {
            CliError::Config(_) => EXIT_USAGE,
            CliError::Core(e) if e.is_numerical_guard() => EXIT_GUARD,
            CliError::Core(
                E::InvalidParameter(_)
                | E::DimensionTooLarge { .. }
                | E::NonpositiveTime(_)
                | E::GridMismatch(_)
                | E::NotFactorized { .. }
                | E::NonHermitianInput { .. },
            ) => EXIT_USAGE,
            CliError::Core(_) | CliError::Internal(_) => EXIT_SOFTWARE,
            CliError::Io(_) => EXIT_IO,
        }
    }
}

/// Parses `argv` (program name first) and runs, reading the process
/// environment.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let env: BTreeMap<String, String> = std::env::vars().collect();
    run_with_env(argv, &env)
}

pub fn run_with_env<I, T>(argv: I, env: &BTreeMap<String, String>) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    let _ = env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level))
        .try_init();
    match execute(&cli, env) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

/// Defaults, then file, then environment, then flags.
pub fn resolve_config(
    cli: &Cli,
    env: &BTreeMap<String, String>,
) -> Result<ScenarioConfig, CliError> {
    let mut cfg = match &cli.config {
        Some(path) => parse_config(path)?,
        None => ScenarioConfig::default(),
    };
    apply_env(&mut cfg, env)?;
    cli.apply(&mut cfg);
    cfg.resolve();
    cfg.validate()?;
    Ok(cfg)
}

fn execute(cli: &Cli, env: &BTreeMap<String, String>) -> Result<i32, CliError> {
    if let Command::Validate(a) = &cli.command {
        if a.list {
            for name in commands::check_names() {
                println!("{name}");
            }
            return Ok(EXIT_OK);
        }
    }
    let cfg = resolve_config(cli, env)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.threads.unwrap_or(0))
        .build()
        .map_err(|e| CliError::Internal(e.to_string()))?;
    let threads = pool.current_num_threads();
    let manifest = pool.install(|| commands::dispatch(&cli.command, &cfg, threads))?;
    let failed: Vec<_> = manifest
        .checks
        .iter()
        .filter(|c| !c.passed)
        .map(|c| c.name.as_str())
        .collect();
    println!(
        "{}: {} outputs, {} checks, {} failed -> {}",
        manifest.subcommand,
        manifest.outputs.len(),
        manifest.checks.len(),
        failed.len(),
        cfg.out_dir.join("manifest.json").display()
    );
    if failed.is_empty() {
        Ok(EXIT_OK)
    } else {
        eprintln!("failed checks: {}", failed.join(", "));
        Ok(EXIT_VALIDATION)
    }
}
