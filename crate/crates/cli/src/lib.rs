//! Command-line front end for the `fermidicke` models. Each subcommand
//! resolves a config (file overlaid by flags), runs, and writes its data
//! with the resolved config alongside.

pub mod args;
pub mod commands;
pub mod config;
pub mod error;
pub mod output;

use serde_json::{json, Value};

use args::{Cli, Command, SweepArgs};
use config::resolve;
use error::{CliError, CliResult};

/// Turns `--range start:stop:count` and `--log` into a `range` object.
fn sweep_flags(a: &SweepArgs) -> CliResult<Value> {
    let mut v = serde_json::to_value(a)?;
    if let Some(r) = &a.range {
        let parts: Vec<&str> = r.split(':').collect();
        let bad = || CliError::Usage(format!("--range expects start:stop:count, got {r:?}"));
        if parts.len() != 3 {
            return Err(bad());
        }
        let start: f64 = parts[0].trim().parse().map_err(|_| bad())?;
        let stop: f64 = parts[1].trim().parse().map_err(|_| bad())?;
        let count: usize = parts[2].trim().parse().map_err(|_| bad())?;
        v["range"] = json!({"start": start, "stop": stop, "count": count, "log": a.log});
    }
    Ok(v)
}

pub fn run(cli: Cli) -> CliResult<()> {
    match cli.command {
        Command::Rates(a) => commands::rates::run(&resolve(a.config.as_deref(), &a)?),
        Command::Classify(a) => commands::classify::run(&resolve(a.config.as_deref(), &a)?),
        Command::Graph(a) => commands::graph::run(&resolve(a.config.as_deref(), &a)?),
        Command::Evolve(a) => commands::evolve::run(&resolve(a.config.as_deref(), &a)?),
        Command::Sweep(a) => {
            let flags = sweep_flags(&a)?;
            commands::sweep::run(&config::resolve_with(a.config.as_deref(), flags)?)
        }
    }
}
