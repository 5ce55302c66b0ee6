//! `idlegap` command-line front-end.
//!
//! Subcommands build a typed document and render it as JSON, CSV, or an
//! aligned text table. Exit codes: 0 success, 2 usage or configuration
//! error, 3 when `simulate --check` exceeds its tolerance.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

use clap::{Parser, Subcommand, ValueEnum};

pub mod analyze;
pub mod compare;
pub mod model;
pub mod render;
pub mod scenario;
pub mod simulate;
pub mod units;

#[derive(Debug, Parser)]
#[command(name = "idlegap", version, about = "Idle-time opportunity modeling for server cores and packages")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Closed-form idle laws, bands, and ideal residencies.
    Model(model::ModelArgs),
    /// Discrete-event simulation with optional check against the model.
    Simulate(simulate::SimulateArgs),
    /// Measured residencies from an idle-interval trace.
    Analyze(analyze::AnalyzeArgs),
    /// Gap between ideal and measured residencies.
    Compare(compare::CompareArgs),
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, ValueEnum)]
pub enum OutFormat {
    #[default]
    Json,
    Csv,
    Table,
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{flag}: {msg}")]
    Config { flag: String, msg: String },
    #[error("check failed: max abs deviation {deviation} exceeds tolerance {tol}")]
    Check { deviation: f64, tol: f64 },
}

impl CliError {
    pub fn config(flag: &str, msg: impl Into<String>) -> Self {
        CliError::Config { flag: flag.to_string(), msg: msg.into() }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config { .. } => 2,
            CliError::Check { .. } => 3,
        }
    }
}

/// Rendered command output plus an optional failure that should still be
/// reported after the document is printed.
#[derive(Debug)]
pub struct Output {
    pub text: String,
    pub failure: Option<CliError>,
}

impl Output {
    pub fn ok(text: String) -> Self {
        Output { text, failure: None }
    }
}

pub fn run(cli: &Cli) -> Result<Output, CliError> {
    match &cli.command {
        Command::Model(args) => model::run(args),
        Command::Simulate(args) => simulate::run(args),
        Command::Analyze(args) => analyze::run(args),
        Command::Compare(args) => compare::run(args),
    }
}
