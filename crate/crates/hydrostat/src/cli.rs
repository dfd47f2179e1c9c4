//! Command-line interface: `run`, `convergence`, and `cases` subcommands.

use std::path::PathBuf;

use clap::error::ErrorKind;
use clap::{Parser, Subcommand};

use crate::cases::CASE_NAMES;
use crate::config::load_config;
use crate::run::{convergence, run};
use crate::Result;

#[derive(Parser)]
#[command(
    name = "hydrostat",
    version,
    about = "Well-balanced low-Mach finite-volume solver for the compressible Euler equations with gravity"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one configured case and print its diagnostics
    Run {
        /// Path to a flat key = value configuration file
        config: PathBuf,
    },
    /// Refine the grid over several levels and print errors and rates
    Convergence {
        /// Path to a flat key = value configuration file
        config: PathBuf,
        /// Comma-separated interior resolutions
        #[arg(long, value_delimiter = ',', default_value = "32,64,128,256,512")]
        levels: Vec<usize>,
    },
    /// List the built-in cases
    Cases,
}

fn execute(cli: Cli) -> Result<String> {
    match cli.command {
        Command::Run { config } => {
            let config = load_config(&config)?;
            let out = run(&config)?;
            Ok(out.report.summary())
        }
        Command::Convergence { config, levels } => {
            let config = load_config(&config)?;
            let report = convergence(&config, &levels)?;
            Ok(report.summary())
        }
        Command::Cases => {
            let mut text = String::new();
            for name in CASE_NAMES {
                text.push_str(name);
                text.push('\n');
            }
            Ok(text)
        }
    }
}

/// Parse `argv` and execute. Returns the process exit code: 0 on success,
/// 1 on configuration or usage failures, 2 when the solver aborts on
/// states leaving the admissible set.
pub fn run_cli<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(err) => {
            let code = match err.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = err.print();
            return code;
        }
    };
    match execute(cli) {
        Ok(text) => {
            print!("{text}");
            0
        }
        Err(err) => {
            eprintln!("error: {err}");
            err.exit_code()
        }
    }
}
