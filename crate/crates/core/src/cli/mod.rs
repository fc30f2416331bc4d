//! Command-line front end of the `uwbocc` binary.

pub mod args;
pub mod commands;
pub mod config;

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{CommandFactory, Parser};

pub use args::{Cli, Command};
pub use commands::DATA_DIR_ENV;

use crate::error::Result;

fn parse(mut argv: Vec<OsString>) -> std::result::Result<Cli, i32> {
    let root = Cli::command();
    // lenient first pass: required options may still come from the file
    let matches = root.clone().ignore_errors(true).try_get_matches_from(&argv);
    let config = matches
        .as_ref()
        .ok()
        .and_then(|m| m.get_one::<PathBuf>("config").cloned().map(|p| (p, m)));
    let Some((path, matches)) = config else {
        return Cli::try_parse_from(&argv).map_err(|e| {
            let _ = e.print();
            e.exit_code()
        });
    };
    let extra = config::config_flags(&path, &root, matches).map_err(|e| {
        eprintln!("error: {e}");
        e.exit_code()
    })?;
    argv.extend(extra);
    Cli::try_parse_from(&argv).map_err(|e| {
        let _ = e.print();
        e.exit_code()
    })
}

fn dispatch(command: &Command) -> Result<()> {
    match command {
        Command::Simulate(a) => commands::simulate(a),
        Command::Import(a) => commands::import(a),
        Command::Train(a) => commands::train(a),
        Command::Evaluate(a) => commands::evaluate(a),
        Command::Ablate(a) => commands::ablate(a),
        Command::Report(a) => commands::report(a),
    }
}

/// Parses `args` (program name first), runs the command and returns the
/// process exit status: 0 success, 2 usage or configuration error, 3 data
/// or I/O error, 4 numerical failure.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString>,
{
    let cli = match parse(args.into_iter().map(Into::into).collect()) {
        Ok(c) => c,
        Err(code) => return code,
    };
    let pool = match rayon::ThreadPoolBuilder::new().num_threads(cli.threads).build() {
        Ok(p) => p,
        Err(e) => {
            eprintln!("error: cannot start {} worker threads: {e}", cli.threads);
            return 3;
        }
    };
    match pool.install(|| dispatch(&cli.command)) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
