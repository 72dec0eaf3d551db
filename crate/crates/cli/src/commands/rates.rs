use fermidicke::analytics::{
    closed_form_rate, rate_bosonic_product_state, rate_fermion_parent_product_state,
    rate_fermionic_product_state, rate_numeric, RateParams,
};
use fermidicke::collective::collective_jump;
use fermidicke::hilbert::{product_superposition_state, Basis, StatisticsConfig};
use serde::Serialize;

use crate::config::RatesConfig;
use crate::error::{CliError, CliResult};
use crate::output::{self, num};

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RateRow {
    pub stats: StatisticsConfig,
    pub n: usize,
    pub gamma0: f64,
    /// `None` when explicit per-site phases were given.
    pub phi: Option<f64>,
    pub source: &'static str,
    pub closed_form: f64,
    pub numeric: f64,
    pub abs_diff: f64,
}

/// Agreement threshold, relative to `N Gamma_0`.
pub const RATE_TOLERANCE: f64 = 1e-8;

fn params(cfg: &RatesConfig) -> CliResult<RateParams> {
    Ok(match &cfg.phases {
        Some(ph) => {
            if ph.len() != cfg.n {
                return Err(CliError::Usage(format!(
                    "{} phases given for n = {}",
                    ph.len(),
                    cfg.n
                )));
            }
            RateParams::with_phases(cfg.gamma0, ph.clone())?
        }
        None => RateParams::uniform(cfg.n, cfg.gamma0, cfg.phi.0)?,
    })
}

fn closed_form(stats: StatisticsConfig, p: &RateParams) -> (&'static str, f64) {
    let uniform = p.phases.is_none();
    match stats {
        StatisticsConfig::BOSON_FERMION if uniform => {
            ("phi_formula", rate_fermionic_product_state(p))
        }
        StatisticsConfig::FERMION_BOSON if uniform => (
            "fermion_parent_phi_formula",
            rate_fermion_parent_product_state(p),
        ),
        StatisticsConfig::BOSON_BOSON if uniform && p.phi == 0.0 => (
            "equal_phase_formula",
            rate_bosonic_product_state(p.n, p.gamma0),
        ),
        _ => ("correlation_sum", closed_form_rate(stats, p)),
    }
}

/// Closed-form and brute-force rates for each requested statistics.
pub fn compute(cfg: &RatesConfig) -> CliResult<Vec<RateRow>> {
    let p = params(cfg)?;
    let stats: Vec<StatisticsConfig> = match cfg.stats {
        Some(s) => vec![s],
        None => StatisticsConfig::ALL.to_vec(),
    };
    let phases = p.site_phases();
    stats
        .into_iter()
        .map(|s| {
            let basis = Basis::new(cfg.n, 0, s)?;
            let psi = product_superposition_state(&basis, &phases)?;
            let l = collective_jump(&basis, cfg.gamma0)?;
            let numeric = rate_numeric(&psi, &l)?;
            let (source, closed) = closed_form(s, &p);
            Ok(RateRow {
                stats: s,
                n: cfg.n,
                gamma0: cfg.gamma0,
                phi: p.phases.is_none().then_some(p.phi),
                source,
                closed_form: closed,
                numeric,
                abs_diff: (closed - numeric).abs(),
            })
        })
        .collect()
}

const HEADER: [&str; 8] = [
    "stats",
    "n",
    "gamma0",
    "phi",
    "source",
    "closed_form",
    "numeric",
    "abs_diff",
];

pub fn run(cfg: &RatesConfig) -> CliResult<()> {
    let rows = compute(cfg)?;
    let records: Vec<Vec<String>> = rows
        .iter()
        .map(|r| {
            vec![
                r.stats.tag().to_string(),
                r.n.to_string(),
                num(r.gamma0),
                output::opt_num(r.phi),
                r.source.to_string(),
                num(r.closed_form),
                num(r.numeric),
                num(r.abs_diff),
            ]
        })
        .collect();
    output::emit(
        cfg.out.as_deref(),
        cfg.format,
        cfg,
        || output::csv_text(&HEADER, &records),
        "rates",
        serde_json::to_value(&rows)?,
    )?;
    if cfg.out.is_some() {
        for r in &rows {
            output::stdout(&format!(
                "{}: closed_form={} numeric={} abs_diff={}\n",
                r.stats.tag(),
                num(r.closed_form),
                num(r.numeric),
                num(r.abs_diff)
            ))?;
        }
    }
    let limit = RATE_TOLERANCE * cfg.n as f64 * cfg.gamma0;
    if let Some(bad) = rows
        .iter()
        .find(|r| r.abs_diff.is_nan() || r.abs_diff > limit)
    {
        return Err(CliError::Numeric(format!(
            "{} rate mismatch {} exceeds {}",
            bad.stats.tag(),
            num(bad.abs_diff),
            num(limit)
        )));
    }
    Ok(())
}
