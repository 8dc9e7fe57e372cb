//! The `wiretap` command-line tool.
//!
//! Every command prints one JSON record `{tool, version, command, config,
//! result}` (or writes it to `--out`); table-producing commands can also
//! write a CSV file. Relative output paths are resolved against
//! `WIRETAP_OUT_DIR` when it is set. Files are written atomically.

mod args;
mod commands;
mod config;

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::Parser;
use serde::Serialize;

use crate::io::write_atomic;
use crate::{Error, Result, VERSION};

pub use args::*;

/// Exit status for configuration and parse errors.
pub const EXIT_CONFIG: i32 = 2;
/// Exit status for failed validation or violated preconditions.
pub const EXIT_VALIDATION: i32 = 3;
/// Exit status for refused work that exceeds a budget.
pub const EXIT_BUDGET: i32 = 4;

pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Parse { .. } | Error::Config(_) | Error::Io(_) => EXIT_CONFIG,
        Error::BudgetExceeded { .. } => EXIT_BUDGET,
        Error::InvalidDistribution(_)
        | Error::InvalidChannel(_)
        | Error::DimensionMismatch(_)
        | Error::Precondition(_)
        | Error::NotDegraded { .. }
        | Error::LinearProgram(_)
        | Error::RejectionCap { .. } => EXIT_VALIDATION,
        Error::Csv(_) | Error::Json(_) => 1,
    }
}

/// Parses `args` and runs the command; returns the process exit status.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_CONFIG } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match run(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

pub fn run(cli: Cli) -> Result<()> {
    let Cli { threads, out, command } = cli;
    if let Command::Run(r) = command {
        let (inner, cfg_threads, cfg_out) = config::load(&r.config)?;
        return run(Cli {
            threads: threads.or(cfg_threads),
            out: out.or(cfg_out),
            command: inner,
        });
    }
    let pool = match threads {
        Some(0) => return Err(Error::Config("--threads must be positive".into())),
        Some(n) => Some(
            rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| Error::Config(e.to_string()))?,
        ),
        None => None,
    };
    let record = match pool {
        Some(p) => p.install(|| commands::dispatch(&command))?,
        None => commands::dispatch(&command)?,
    };
    let mut text = serde_json::to_string_pretty(&record)?;
    text.push('\n');
    match out {
        Some(path) => write_output(&path, text.as_bytes()),
        None => match std::io::stdout().lock().write_all(text.as_bytes()) {
            Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => Err(e.into()),
            _ => Ok(()),
        },
    }
}

/// `{tool, version, command, config, result}`.
#[derive(Debug, Serialize)]
pub struct Record {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: String,
    pub config: serde_json::Value,
    pub result: serde_json::Value,
}

impl Record {
    fn new(command: &str, config: &impl Serialize, result: &impl Serialize) -> Result<Self> {
        Ok(Self {
            tool: "wiretap",
            version: VERSION,
            command: command.to_string(),
            config: serde_json::to_value(config)?,
            result: serde_json::to_value(result)?,
        })
    }
}

/// Resolves a relative output path against `WIRETAP_OUT_DIR`.
pub fn output_path(path: &Path) -> PathBuf {
    match std::env::var_os("WIRETAP_OUT_DIR") {
        Some(dir) if path.is_relative() => Path::new(&dir).join(path),
        _ => path.to_path_buf(),
    }
}

fn write_output(path: &Path, bytes: &[u8]) -> Result<()> {
    let path = output_path(path);
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        std::fs::create_dir_all(parent)?;
    }
    write_atomic(&path, bytes)
}
