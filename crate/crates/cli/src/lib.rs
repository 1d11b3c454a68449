//! Command-line front end for `arw-core`: identity suites, correlation scans and Monte
//! Carlo experiments. Every file written carries the manifest that produced it, and
//! `experiment --replay` re-runs those manifests.

pub mod args;
pub mod commands;
pub mod config;
pub mod identities;
pub mod output;

use clap::Parser;

pub use args::Cli;
pub use commands::{execute, EXIT_DOMAIN, EXIT_OK, EXIT_SUITE, EXIT_USAGE};

/// Parses `args` (program name first), runs the command and returns the exit code.
pub fn run(args: Vec<String>) -> i32 {
    let args = match config::expand_args(args) {
        Ok(a) => a,
        Err(e) => {
            eprintln!("error: {e:#}");
            return EXIT_USAGE;
        }
    };
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    if let Some(t) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build_global()
        {
            eprintln!("error: {e}");
            return EXIT_USAGE;
        }
    }
    match execute(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            commands::exit_code(&e)
        }
    }
}
