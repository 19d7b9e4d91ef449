mod args;
mod commands;

use std::process::ExitCode;

use clap::Parser;

use skilltwin_core::{Error, RunConfig};

use args::Cli;

/// Bad invocation detected after argument parsing.
#[derive(Debug, thiserror::Error)]
#[error("{0}")]
pub struct UsageError(pub String);

const EXIT_FAILURE: u8 = 1;
const EXIT_USAGE: u8 = 2;

fn resolve(cli: &Cli) -> anyhow::Result<RunConfig> {
    let base = match &cli.config.config {
        Some(path) => RunConfig::from_json_file(path)?,
        None => RunConfig::default(),
    };
    let config = cli.config.apply(base);
    config.validate()?;
    Ok(config)
}

fn error_kind(err: &anyhow::Error) -> (&'static str, u8) {
    if err.is::<UsageError>() {
        return ("usage", EXIT_USAGE);
    }
    match err.downcast_ref::<Error>() {
        Some(Error::Argument(_) | Error::Config(_)) => ("usage", EXIT_USAGE),
        Some(Error::Io { .. }) => ("io", EXIT_FAILURE),
        Some(Error::Parse { .. } | Error::Json(_)) => ("parse", EXIT_FAILURE),
        Some(Error::Shortfall { .. }) => ("shortfall", EXIT_FAILURE),
        Some(Error::UnknownId(_)) => ("unknown_id", EXIT_FAILURE),
        Some(_) => ("pipeline", EXIT_FAILURE),
        None if err.downcast_ref::<std::io::Error>().is_some() => ("io", EXIT_FAILURE),
        None => ("error", EXIT_FAILURE),
    }
}

/// The error chain joined by `: `, skipping causes already quoted by their parent.
fn describe(err: &anyhow::Error) -> String {
    let mut message = String::new();
    for cause in err.chain() {
        let text = cause.to_string();
        if !message.contains(&text) {
            if !message.is_empty() {
                message.push_str(": ");
            }
            message.push_str(&text);
        }
    }
    message
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();

    let outcome = resolve(&cli).and_then(|config| {
        if !cli.quiet {
            eprintln!("{}", serde_json::json!({ "config": config }));
        }
        if config.jobs > 0 {
            rayon::ThreadPoolBuilder::new().num_threads(config.jobs).build_global()?;
        }
        commands::run(cli.command, &config)
    });
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            let (kind, code) = error_kind(&err);
            let message = describe(&err);
            eprintln!("{}", serde_json::json!({ "error": { "kind": kind, "message": message } }));
            ExitCode::from(code)
        }
    }
}
