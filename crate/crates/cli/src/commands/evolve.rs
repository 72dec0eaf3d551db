use fermidicke::dynamics::ode::OdeStats;
use fermidicke::dynamics::{
    analytic_n0, dephasing_decay_rates, linear_grid, regime_classify, CheckpointDiagnostics,
    DephasingRates, ModelParams, RegimeReport,
};
use serde::Serialize;

use super::dynamics::{default_t_max, options, simulate, Run};
use crate::config::{Engine, EvolveConfig, Format};
use crate::error::CliResult;
use crate::output::{self, with_suffix};

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AnalyticComparison {
    pub form: &'static str,
    pub max_abs_deviation: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FinalValues {
    pub t: f64,
    pub n_c: f64,
    pub n_nu: f64,
    pub n_bar: f64,
    pub emitted: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EvolveReport {
    pub config: EvolveConfig,
    pub regime: RegimeReport,
    /// Absent with dephasing or bosonic emission, where no closed form for
    /// `n_C(t)` applies.
    pub analytic: Option<AnalyticComparison>,
    pub dephasing_rates: Option<DephasingRates>,
    pub dimension: usize,
    pub integrator: OdeStats,
    pub diagnostics: Option<CheckpointDiagnostics>,
    #[serde(rename = "final")]
    pub final_values: FinalValues,
}

pub fn params(cfg: &EvolveConfig) -> CliResult<ModelParams> {
    Ok(ModelParams::new(cfg.g, cfg.n, cfg.kappa, cfg.kappa_phi)?)
}

/// Fills in `t_max` when absent.
pub fn resolve(cfg: &EvolveConfig) -> CliResult<EvolveConfig> {
    let p = params(cfg)?;
    let mut out = cfg.clone();
    if out.t_max.is_none() {
        out.t_max = Some(default_t_max(&p)?);
    }
    Ok(out)
}

fn engine(cfg: &EvolveConfig) -> Engine {
    if cfg.stats.emits_fermion() {
        cfg.engine
    } else {
        Engine::Density
    }
}

pub fn compute(cfg: &EvolveConfig) -> CliResult<(EvolveReport, Run)> {
    let cfg = resolve(cfg)?;
    let p = params(&cfg)?;
    let grid = linear_grid(cfg.t_max.expect("resolved"), cfg.points)?;
    let opts = options(cfg.rtol, cfg.atol)?;
    let run = simulate(cfg.stats, engine(&cfg), &p, &grid, &opts)?;
    let regime = regime_classify(&p);

    let analytic = if cfg.stats.emits_fermion() && cfg.kappa_phi == 0.0 && p.g > 0.0 {
        let r = regime.cavity;
        Some(AnalyticComparison {
            form: r.name(),
            max_abs_deviation: run.trajectory.max_deviation(|t| analytic_n0(r, &p, t))?,
        })
    } else {
        None
    };
    let dephasing_rates = (cfg.kappa > 0.0 && cfg.kappa_phi > 0.0)
        .then(|| dephasing_decay_rates(&p))
        .transpose()?;
    let last = *run
        .trajectory
        .points()
        .last()
        .expect("grid has >= 2 points");
    let report = EvolveReport {
        regime,
        analytic,
        dephasing_rates,
        dimension: run.dim,
        integrator: run.trajectory.stats(),
        diagnostics: run.diagnostics.clone(),
        final_values: FinalValues {
            t: last.t,
            n_c: last.n_c,
            n_nu: last.n_nu,
            n_bar: last.n_bar,
            emitted: last.emitted,
        },
        config: cfg,
    };
    Ok((report, run))
}

pub fn run(cfg: &EvolveConfig) -> CliResult<()> {
    let (report, run) = compute(cfg)?;
    let tr = &run.trajectory;
    let text = match cfg.format {
        Format::Csv => tr.to_csv(),
        Format::Json => output::pretty(&serde_json::json!({
            "config": report.config,
            "trajectory": tr.to_json_value(),
        }))?,
    };
    let report_text = output::pretty(&report)?;
    match &cfg.out {
        Some(p) => {
            output::write_file(p, &text)?;
            output::write_file(&with_suffix(p, ".report.json"), &report_text)?;
            if let Some(a) = &report.analytic {
                output::stdout(&format!(
                    "regime={}, max_abs_deviation={}\n",
                    a.form,
                    output::num(a.max_abs_deviation)
                ))?;
            } else {
                output::stdout(&format!(
                    "regime={}/{}\n",
                    report.regime.cavity.name(),
                    report.regime.dephasing.name()
                ))?;
            }
        }
        None => {
            output::stdout(&text)?;
            output::stderr(&report_text);
        }
    }
    for w in &report.regime.warnings {
        output::stderr(&format!("warning: {w}\n"));
    }
    Ok(())
}
