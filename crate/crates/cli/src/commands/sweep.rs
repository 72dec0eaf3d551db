use fermidicke::dynamics::{fit_decay_rate, linear_grid, ModelParams};
use rayon::prelude::*;
use serde::Serialize;

use super::dynamics::{default_t_max, options, rabi_frequency, simulate};
use crate::config::{Engine, SweepConfig, SweepParam, SweepUnit};
use crate::error::{CliError, CliResult};
use crate::output::{self, num, opt_num};

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct SweepRow {
    pub index: usize,
    /// Grid value in the configured unit.
    pub value: f64,
    /// The swept parameter in absolute units.
    pub param_value: Option<f64>,
    pub t_max: Option<f64>,
    pub n_c: Option<f64>,
    pub n_nu: Option<f64>,
    pub n_bar: Option<f64>,
    pub emitted: Option<f64>,
    /// Log-linear fit of `n_bar` over the tail half.
    pub slow_rate: Option<f64>,
    /// Log-linear fit of `n_C` over the tail half.
    pub n_c_rate: Option<f64>,
    pub rabi_frequency: Option<f64>,
    /// `None` on success.
    pub error: Option<String>,
}

fn base(cfg: &SweepConfig) -> ModelParams {
    ModelParams {
        g: cfg.g,
        n: cfg.n,
        kappa: cfg.kappa,
        kappa_phi: cfg.kappa_phi,
    }
}

/// Checks parameter/unit combinations whose scale would depend on the swept
/// value itself.
fn check_unit(param: SweepParam, unit: SweepUnit) -> CliResult<()> {
    use SweepParam::*;
    let circular = match unit {
        SweepUnit::Abs => false,
        SweepUnit::NGamma0 => matches!(param, N | G | Kappa),
        SweepUnit::GSqrtN => matches!(param, N | G),
    };
    if circular {
        return Err(CliError::Usage(format!(
            "unit {unit:?} depends on the swept parameter {param}"
        )));
    }
    Ok(())
}

fn point_params(cfg: &SweepConfig, value: f64) -> CliResult<ModelParams> {
    let mut p = base(cfg);
    let scale = match cfg.unit {
        SweepUnit::Abs => 1.0,
        SweepUnit::NGamma0 => p.n as f64 * p.gamma0()?,
        SweepUnit::GSqrtN => p.g_sqrt_n(),
    };
    let x = value * scale;
    match cfg.param {
        SweepParam::N => {
            if !(x >= 1.0 && x.fract() == 0.0) {
                return Err(CliError::Usage(format!(
                    "n must be a positive integer, got {x}"
                )));
            }
            p.n = x as usize;
        }
        SweepParam::G => p.g = x,
        SweepParam::Kappa => p.kappa = x,
        SweepParam::KappaPhi => p.kappa_phi = x,
    }
    p.validate()?;
    Ok(p)
}

fn point(cfg: &SweepConfig, index: usize, value: f64) -> SweepRow {
    let mut row = SweepRow {
        index,
        value,
        ..SweepRow::default()
    };
    let result = (|| -> CliResult<()> {
        let p = point_params(cfg, value)?;
        row.param_value = Some(match cfg.param {
            SweepParam::N => p.n as f64,
            SweepParam::G => p.g,
            SweepParam::Kappa => p.kappa,
            SweepParam::KappaPhi => p.kappa_phi,
        });
        let t_max = match cfg.t_max {
            Some(t) => t,
            None => default_t_max(&p)?,
        };
        row.t_max = Some(t_max);
        let grid = linear_grid(t_max, cfg.points)?;
        let engine = if cfg.stats.emits_fermion() {
            cfg.engine
        } else {
            Engine::Density
        };
        let run = simulate(cfg.stats, engine, &p, &grid, &options(cfg.rtol, cfg.atol)?)?;
        let tr = &run.trajectory;
        let last = tr.points().last().expect("grid has >= 2 points");
        row.n_c = Some(last.n_c);
        row.n_nu = Some(last.n_nu);
        row.n_bar = Some(last.n_bar);
        row.emitted = Some(last.emitted);
        let times = tr.times();
        let col = |f: fn(&fermidicke::dynamics::TrajectoryPoint) -> f64| -> Vec<f64> {
            tr.points().iter().map(f).collect()
        };
        row.slow_rate = fit_decay_rate(&times, &col(|q| q.n_bar));
        row.n_c_rate = fit_decay_rate(&times, &col(|q| q.n_c));
        row.rabi_frequency = rabi_frequency(tr);
        Ok(())
    })();
    if let Err(e) = result {
        row.error = Some(e.to_string());
    }
    row
}

/// One row per grid value, in grid order. Points run in parallel; a failed
/// point keeps its row with the error filled in.
pub fn compute(cfg: &SweepConfig) -> CliResult<Vec<SweepRow>> {
    check_unit(cfg.param, cfg.unit)?;
    let grid = cfg.grid()?;
    // Whole-config problems are usage errors rather than per-row failures.
    base(cfg).validate()?;
    super::dynamics::check_tolerances(cfg.rtol, cfg.atol)?;
    if cfg.points < 2 {
        return Err(CliError::Usage(format!(
            "a time grid needs at least 2 points, got {}",
            cfg.points
        )));
    }
    Ok(grid
        .par_iter()
        .enumerate()
        .map(|(i, &v)| point(cfg, i, v))
        .collect())
}

const HEADER: [&str; 14] = [
    "index",
    "param",
    "value",
    "param_value",
    "t_max",
    "n_C",
    "n_nu",
    "n_bar",
    "emitted",
    "slow_rate",
    "n_C_rate",
    "rabi_frequency",
    "status",
    "error",
];

pub fn run(cfg: &SweepConfig) -> CliResult<()> {
    let rows = compute(cfg)?;
    let param = cfg.param.to_string();
    let records: Vec<Vec<String>> = rows
        .iter()
        .map(|r| {
            vec![
                r.index.to_string(),
                param.clone(),
                num(r.value),
                opt_num(r.param_value),
                opt_num(r.t_max),
                opt_num(r.n_c),
                opt_num(r.n_nu),
                opt_num(r.n_bar),
                opt_num(r.emitted),
                opt_num(r.slow_rate),
                opt_num(r.n_c_rate),
                opt_num(r.rabi_frequency),
                if r.error.is_none() { "ok" } else { "failed" }.to_string(),
                r.error.clone().unwrap_or_default(),
            ]
        })
        .collect();
    output::emit(
        cfg.out.as_deref(),
        cfg.format,
        cfg,
        || output::csv_text(&HEADER, &records),
        "rows",
        serde_json::to_value(&rows)?,
    )?;
    let failed = rows.iter().filter(|r| r.error.is_some()).count();
    let line = format!("rows={}, failed={failed}\n", rows.len());
    if cfg.out.is_some() {
        output::stdout(&line)?;
    } else {
        output::stderr(&line);
    }
    if failed == rows.len() {
        return Err(CliError::Numeric("every sweep point failed".into()));
    }
    Ok(())
}
