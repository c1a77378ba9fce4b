//! Library surface of the rebound CLI: file formats, conversions, report
//! emission, and command implementations. The binary in `main.rs` is a thin
//! argument-parsing wrapper; integration tests drive these pieces directly.

pub mod commands;
pub mod convert;
pub mod formats;
pub mod report;

#[derive(Debug)]
pub struct CliError {
    pub exit_code: i32,
    pub message: String,
}

impl CliError {
    pub fn parse(message: impl Into<String>) -> Self {
        CliError { exit_code: 2, message: message.into() }
    }

    pub fn validation(message: impl Into<String>) -> Self {
        CliError { exit_code: 1, message: message.into() }
    }

    pub fn validation_err(e: rebound_core::Error) -> Self {
        CliError { exit_code: 1, message: e.to_string() }
    }
}
