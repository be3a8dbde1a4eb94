mod args;
mod commands;

use std::process::ExitCode;

use clap::Parser;
use kumlest::Error;

use args::{Cli, Command};

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Parse { .. } => 3,
        Error::Support { .. } => 4,
        Error::NegativeVarianceProxy { .. } => 5,
        Error::Quadrature(_) => 6,
        _ => 1,
    }
}

fn kind(e: &Error) -> &'static str {
    match e {
        Error::Domain(_) => "domain",
        Error::InvalidParameter(_) => "invalid_parameter",
        Error::Support { .. } => "support",
        Error::NegativeVarianceProxy { .. } => "negative_variance_proxy",
        Error::Degenerate(_) => "degenerate",
        Error::Quadrature(_) => "quadrature",
        Error::Bracket { .. } => "bracket",
        Error::Parse { .. } => "parse",
        Error::Empty(_) => "empty",
        Error::Io(_) => "io",
        Error::Config(_) => "config",
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Fit(a) => commands::cmd_fit(a),
        Command::Are(a) => commands::cmd_are(a),
        Command::Simulate(a) => commands::cmd_simulate(a),
        Command::Ks(a) => commands::cmd_ks(a),
        Command::Weights(a) => commands::cmd_weights(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let code = exit_code(&e);
            let body = serde_json::json!({
                "error": kind(&e),
                "message": e.to_string(),
                "exit_code": code,
            });
            eprintln!("{body}");
            ExitCode::from(code)
        }
    }
}
