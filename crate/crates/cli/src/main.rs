mod args;
mod commands;
mod error;
mod manifest;
mod settings;
mod summary;

use std::process::ExitCode;

use clap::Parser;

use args::{Cli, Command};
use error::{CliError, CliResult, EXIT_USAGE};
use settings::{ConfigFile, ConfigSource};

fn run(cli: Cli) -> CliResult<()> {
    let source = match &cli.config {
        Some(p) => ConfigSource::load(p)?,
        None => ConfigSource::Toml(ConfigFile::default()),
    };
    let threads = cli.threads.or(source.threads());
    if let Some(n) = threads {
        if n == 0 {
            return Err(CliError::usage("--threads must be >= 1"));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::usage(format!("cannot start {n} threads: {e}")))?;
    }
    match cli.command {
        Command::Proxy(a) => commands::proxy(a, &source, threads),
        Command::Scaling(a) => commands::scaling(a, &source, threads),
        Command::Simulate(a) => commands::simulate(a, &source, threads),
        Command::Forecast(a) => commands::forecast(a, &source, threads),
        Command::Report(a) => commands::report(a),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(EXIT_USAGE) } else { ExitCode::SUCCESS };
        }
    };
    let level = if cli.verbose { "info" } else { "warn" };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level))
        .format_timestamp(None)
        .init();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.code)
        }
    }
}
