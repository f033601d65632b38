//! Command-line front end: config resolution, experiment execution and
//! report emission.

pub mod commands;
pub mod config;
pub mod error;
pub mod report;

use std::ffi::OsString;
use std::io::Write;
use std::path::Path;

use clap::{Parser, Subcommand};

use commands::{CompareArgs, GenArgs, OracleArgs, RunArgs, SweepArgs};
pub use error::{CliError, EXIT_CONFIG, EXIT_RUNTIME};

#[derive(Debug, Parser)]
#[command(name = "vecsim", version, about = "Privacy- and deadline-aware placement simulator for vehicular edge platforms")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Simulate one policy on one workload and write a JSON report.
    Run(RunArgs),
    /// Run policies across seeds and tabulate QoS, QoR and cost.
    Compare(CompareArgs),
    /// Repeat `compare` for each value of one platform or simulation parameter.
    Sweep(SweepArgs),
    /// Exhaustively search the best assignment of a small workload.
    Oracle(OracleArgs),
    /// Write a generated workload to a JSON file.
    Gen(GenArgs),
}

impl Command {
    fn out(&self) -> Option<&Path> {
        match self {
            Self::Run(a) => a.common.out.as_deref(),
            Self::Compare(a) => a.common.out.as_deref(),
            Self::Sweep(a) => a.compare.common.out.as_deref(),
            Self::Oracle(a) => a.common.out.as_deref(),
            Self::Gen(a) => a.out.as_deref(),
        }
    }

    /// Produces the command's output document.
    pub fn render(&self) -> Result<String, CliError> {
        match self {
            Self::Run(a) => commands::cmd_run(a),
            Self::Compare(a) => commands::cmd_compare(a),
            Self::Sweep(a) => commands::cmd_sweep(a),
            Self::Oracle(a) => commands::cmd_oracle(a),
            Self::Gen(a) => commands::cmd_gen(a),
        }
    }
}

/// Writes `text` to `path` through a sibling temporary file, so a failed
/// write never leaves a partial report behind.
pub fn write_atomic(path: &Path, text: &str) -> Result<(), CliError> {
    let name = path
        .file_name()
        .ok_or_else(|| CliError::config(format!("invalid output path {}", path.display())))?;
    let mut tmp_name = OsString::from(".");
    tmp_name.push(name);
    tmp_name.push(".tmp");
    let tmp = path.with_file_name(tmp_name);
    let result = std::fs::write(&tmp, text).and_then(|()| std::fs::rename(&tmp, path));
    if let Err(e) = result {
        let _ = std::fs::remove_file(&tmp);
        return Err(CliError::runtime(format!("cannot write {}: {e}", path.display())));
    }
    Ok(())
}

/// Runs a parsed command and returns the process exit code.
pub fn execute(cli: &Cli) -> u8 {
    let outcome = cli.command.render().and_then(|text| match cli.command.out() {
        Some(path) => write_atomic(path, &text),
        None => std::io::stdout()
            .lock()
            .write_all(text.as_bytes())
            .map_err(|e| CliError::runtime(format!("cannot write output: {e}"))),
    });
    match outcome {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

/// Parses `args` (including the program name) and runs the command.
pub fn main_with_args<I, T>(args: I) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    match Cli::try_parse_from(args) {
        Ok(cli) => execute(&cli),
        Err(e) => {
            let _ = e.print();
            if e.use_stderr() {
                EXIT_CONFIG
            } else {
                0
            }
        }
    }
}
