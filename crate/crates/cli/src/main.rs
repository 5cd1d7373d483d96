mod args;
mod config;
mod error;
mod output;
mod presets;
mod run;

use std::process::ExitCode;

use alphamu::SeriesKind;
use clap::Parser;

use crate::args::{Cli, Command};
use crate::error::CliError;

fn dispatch(cli: &Cli) -> Result<(), CliError> {
    match &cli.command {
        Command::Pdf(a) => run::density(a, SeriesKind::Pdf),
        Command::Cdf(a) => run::density(a, SeriesKind::Cdf),
        Command::AccuracyTable(a) => run::accuracy_table(a),
        Command::Aser(a) => run::link(a, false),
        Command::Op(a) => run::link(a, true),
        Command::Validate(a) => run::validate(a),
        Command::Bench(a) => run::bench(a),
    }
}

fn main() -> ExitCode {
    let result = config::expand(std::env::args_os().collect())
        .and_then(|argv| dispatch(&Cli::parse_from(argv)));
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("alphamu: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
