mod args;
mod commands;
mod config;
mod error;
mod svg;

use args::Cli;
use clap::error::ErrorKind;
use clap::Parser;
use config::RunConfig;
use error::{CliError, EXIT_USAGE};
use std::io::Write;
use std::process::ExitCode;

fn execute(cli: &Cli) -> Result<(), CliError> {
    let cfg = RunConfig::load(cli)?;
    let emits = commands::run(&cli.command, &cfg)?;
    for e in emits {
        match e.path.filter(|p| p.as_os_str() != "-") {
            Some(p) => std::fs::write(&p, &e.body).map_err(|err| CliError::Io {
                path: p.clone(),
                source: err,
            })?,
            None => {
                let mut out = std::io::stdout().lock();
                out.write_all(&e.body)
                    .and_then(|_| out.flush())
                    .map_err(|err| CliError::Io {
                        path: "<stdout>".into(),
                        source: err,
                    })?;
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(EXIT_USAGE),
            };
        }
    };
    match execute(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("lunar3b: {e}");
            e.exit_code()
        }
    }
}
