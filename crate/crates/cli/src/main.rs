//! `kolab` command-line front end.
//!
//! Exit codes: 0 on success (a detected blow-up is a result), 1 when a run aborts,
//! a verification fails or every sweep row errors, 2 on invalid configuration.

mod args;
mod commands;
mod grammar;

use std::fs;
use std::process::ExitCode;

use clap::Parser;
use serde_json::Value;

use args::{merge, Cli, Command};
use commands::Sink;

#[derive(Debug, thiserror::Error)]
#[error("{msg}")]
pub struct CliError {
    pub code: u8,
    pub msg: String,
}

impl CliError {
    pub fn config(msg: impl Into<String>) -> Self {
        CliError { code: 2, msg: msg.into() }
    }

    pub fn io(msg: impl Into<String>) -> Self {
        CliError { code: 1, msg: msg.into() }
    }
}

impl From<kolab::Error> for CliError {
    fn from(e: kolab::Error) -> Self {
        let code = match e {
            kolab::Error::InvalidParams(_) | kolab::Error::OrderOutOfRange { .. } => 2,
            _ => 1,
        };
        CliError { code, msg: e.to_string() }
    }
}

fn run(cli: Cli) -> Result<u8, CliError> {
    let config: Option<Value> = match &cli.config {
        Some(path) => {
            let text = fs::read_to_string(path)
                .map_err(|e| CliError::config(format!("cannot read config {}: {e}", path.display())))?;
            Some(serde_json::from_str(&text).map_err(|e| CliError::config(format!("config {}: {e}", path.display())))?)
        }
        None => None,
    };
    let cfg = config.as_ref();
    let sink = Sink { out: cli.out };
    match cli.command {
        Command::Solve(a) => commands::solve_cmd(merge(&a, cfg)?, &sink),
        Command::CheckKo(a) => commands::check_ko_cmd(merge(&a, cfg)?, &sink),
        Command::Map(a) => commands::map_cmd(merge(&a, cfg)?, &sink),
        Command::Classify(a) => commands::classify_cmd(merge(&a, cfg)?, &sink),
        Command::Verify(a) => commands::verify_cmd(merge(&a, cfg)?, &sink),
        Command::Sweep(a) => commands::sweep_cmd(merge(&a, cfg)?, &sink),
        Command::Table(a) => commands::table_cmd(merge(&a, cfg)?, &sink),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.code)
        }
    }
}
