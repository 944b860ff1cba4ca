//! `bioreg` binary entry point.
//!
//! Exit codes: 0 success (including --help/--version), 1 command-line usage
//! errors, 2 data errors (unreadable/malformed/inconsistent inputs),
//! 3 numeric failure (non-finite loss during optimization).

use clap::Parser;

use bioreg_cli::cli::{Cli, Command};
use bioreg_cli::commands;
use bioreg_cli::error::CliError;

fn main() {
    std::process::exit(run());
}

fn run() -> i32 {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            use clap::error::ErrorKind;
            let requested = matches!(
                err.kind(),
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion
            );
            let _ = err.print();
            return if requested { 0 } else { 1 };
        }
    };

    let level = match cli.verbose {
        0 => log::LevelFilter::Warn,
        1 => log::LevelFilter::Info,
        _ => log::LevelFilter::Debug,
    };
    env_logger::Builder::new()
        .filter_level(level)
        .format_timestamp(None)
        .init();

    match dispatch(&cli.command) {
        Ok(()) => 0,
        Err(err) => {
            eprintln!("{}: {err}", err.category());
            err.exit_code()
        }
    }
}

fn dispatch(command: &Command) -> Result<(), CliError> {
    match command {
        Command::Register(args) => commands::cmd_register(args),
        Command::Metrics(args) => commands::cmd_metrics(args),
        Command::Strain(args) => commands::cmd_strain(args),
        Command::Phantom(args) => commands::cmd_phantom(args),
        Command::Sweep(args) => commands::cmd_sweep(args),
    }
}
