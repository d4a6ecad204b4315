mod args;
mod commands;
mod report;

use std::process::ExitCode;

use bergman_core::LabError;
use clap::Parser;
use serde_json::json;

use crate::args::Cli;

/// Exit status per error kind; 2 is left to argument parsing.
fn exit_status(e: &LabError) -> u8 {
    match e {
        LabError::Input(_) => 3,
        LabError::Domain(_) => 4,
        LabError::Regime(_) => 5,
        LabError::Contract(_) => 6,
        LabError::Config(_) => 7,
        LabError::Divergence(_) => 8,
        LabError::Io(_) => 9,
        LabError::OutOfScope(_) => 10,
        LabError::Resolution(_) => 11,
    }
}

fn fail(e: &LabError) -> ExitCode {
    let body = json!({
        "schema_version": report::SCHEMA_VERSION,
        "error": {"code": e.code(), "message": e.to_string()},
    });
    eprintln!("{body}");
    ExitCode::from(exit_status(e))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match commands::run(&cli.command) {
        Ok(o) => o,
        Err(e) => return fail(&e),
    };
    if let Err(e) = outcome.write(cli.out.as_deref()) {
        return fail(&e);
    }
    match &outcome.status {
        Some(e) => fail(e),
        None => ExitCode::SUCCESS,
    }
}
