//! `shapkit`: explain model predictions with exact and ensemble Shapley
//! values, compare explainers, sweep ensemble budgets and benchmark them.
//!
//! Errors go to stderr as one JSON object and the process exits nonzero.
//! `SHAPKIT_LOG` sets the log level (default `warn`).

mod commands;
mod setup;
mod spec;

use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde_json::json;
use shapkit::ShapError;

use spec::RunSpec;

#[derive(Parser)]
#[command(name = "shapkit", version, about = "Exact and ensemble Shapley explanations")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Explain one or more instances and write the attribution report.
    Explain(RunSpec),
    /// Compare an explainer against a reference, one CSV row per instance.
    Compare(RunSpec),
    /// Mean concordance (and E, time ratio) over an N x t grid.
    Sweep(RunSpec),
    /// Median wall time and model calls per explainer.
    Bench(RunSpec),
}

fn error_kind(err: &anyhow::Error) -> &'static str {
    err.chain()
        .find_map(|e| e.downcast_ref::<ShapError>())
        .map(ShapError::kind)
        .or_else(|| {
            err.chain()
                .find_map(|e| e.downcast_ref::<std::io::Error>())
                .map(|_| "io")
        })
        .unwrap_or("error")
}

fn report_error(kind: &str, message: String) {
    eprintln!("{}", json!({"error": {"kind": kind, "message": message}}));
}

fn run(command: Command) -> anyhow::Result<()> {
    let (name, raw, run): (&str, RunSpec, fn(&RunSpec) -> anyhow::Result<()>) = match command {
        Command::Explain(s) => ("explain", s, commands::explain),
        Command::Compare(s) => ("compare", s, commands::compare),
        Command::Sweep(s) => ("sweep", s, commands::sweep),
        Command::Bench(s) => ("bench", s, commands::bench),
    };
    let spec = raw.resolve(name)?;
    log::debug!("{name} with {spec:?}");
    run(&spec)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("SHAPKIT_LOG", "warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            report_error("usage", e.to_string().trim().to_string());
            return ExitCode::from(2);
        }
    };
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            let kind = error_kind(&err);
            report_error(kind, format!("{err:#}"));
            if kind == "config" {
                ExitCode::from(2)
            } else {
                ExitCode::FAILURE
            }
        }
    }
}
