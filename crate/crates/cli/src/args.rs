use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use fermidicke::hilbert::StatisticsConfig;
use serde::Serialize;

use crate::config::{Angle, Engine, Format, List, SweepParam, SweepUnit};

#[derive(Debug, Parser)]
#[command(
    name = "fermidicke",
    version,
    about = "Collective emission of fermions and bosons"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Closed-form against numeric emission rates of product states.
    Rates(RatesArgs),
    /// Bright/dark classification of the emission-rate operator.
    Classify(ClassifyArgs),
    /// Multi-mode sector graph with DOT and JSON export.
    Graph(GraphArgs),
    /// Cavity dynamics from the all-parent state.
    Evolve(EvolveArgs),
    /// Final observables and fitted rates over a parameter grid.
    Sweep(SweepArgs),
}

fn parse_stats(s: &str) -> Result<StatisticsConfig, String> {
    s.parse().map_err(|e| format!("{e}"))
}

#[derive(Debug, Args, Serialize)]
pub struct RatesArgs {
    /// JSON config file; flags override its keys.
    #[arg(long)]
    #[serde(skip)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub n: Option<usize>,
    /// bf, fb or bb; all three when absent.
    #[arg(long, value_parser = parse_stats)]
    pub stats: Option<StatisticsConfig>,
    #[arg(long)]
    pub gamma0: Option<f64>,
    /// Neighbour phase difference, e.g. `pi`, `pi/2`, `0.3`.
    #[arg(long, allow_hyphen_values = true)]
    pub phi: Option<Angle>,
    /// Per-site phases, comma separated.
    #[arg(long, allow_hyphen_values = true)]
    pub phases: Option<List>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
pub struct ClassifyArgs {
    #[arg(long)]
    #[serde(skip)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long, value_parser = parse_stats)]
    pub stats: Option<StatisticsConfig>,
    #[arg(long)]
    pub gamma0: Option<f64>,
    /// Write the classified eigenbasis as JSON.
    #[arg(long)]
    pub dump: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
pub struct GraphArgs {
    #[arg(long)]
    #[serde(skip)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub n: Option<usize>,
    /// Number of emitting modes.
    #[arg(long)]
    pub modes: Option<usize>,
    #[arg(long, value_parser = parse_stats)]
    pub stats: Option<StatisticsConfig>,
    #[arg(long)]
    pub gamma0: Option<f64>,
    /// Per-mode rates, comma separated.
    #[arg(long)]
    pub rates: Option<List>,
    /// Output base path.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
pub struct DynamicsArgs {
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long, value_parser = parse_stats)]
    pub stats: Option<StatisticsConfig>,
    #[arg(long)]
    pub g: Option<f64>,
    #[arg(long)]
    pub kappa: Option<f64>,
    #[arg(long = "kappa-phi")]
    pub kappa_phi: Option<f64>,
    #[arg(long = "t-max")]
    pub t_max: Option<f64>,
    /// Output grid size, including t = 0.
    #[arg(long)]
    pub points: Option<usize>,
    #[arg(long)]
    pub rtol: Option<f64>,
    #[arg(long)]
    pub atol: Option<f64>,
    #[arg(long, value_enum)]
    pub engine: Option<Engine>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
pub struct EvolveArgs {
    #[arg(long)]
    #[serde(skip)]
    pub config: Option<PathBuf>,
    #[command(flatten)]
    #[serde(flatten)]
    pub dynamics: DynamicsArgs,
}

#[derive(Debug, Args, Serialize)]
pub struct SweepArgs {
    #[arg(long)]
    #[serde(skip)]
    pub config: Option<PathBuf>,
    #[command(flatten)]
    #[serde(flatten)]
    pub dynamics: DynamicsArgs,
    #[arg(long, value_enum)]
    pub param: Option<SweepParam>,
    #[arg(long, value_enum)]
    pub unit: Option<SweepUnit>,
    /// Explicit grid values, comma separated.
    #[arg(long, allow_hyphen_values = true)]
    pub values: Option<List>,
    /// `start:stop:count`, evenly spaced.
    #[arg(long, conflicts_with = "values")]
    #[serde(skip)]
    pub range: Option<String>,
    /// Space the range logarithmically.
    #[arg(long, requires = "range")]
    #[serde(skip)]
    pub log: bool,
}
