//! Pieces shared by `evolve` and `sweep`.

use std::f64::consts::PI;

use fermidicke::dynamics::{
    dephasing_decay_rates, evolve_density_matrix, evolve_moments, regime_classify, CavityRegime,
    CheckpointDiagnostics, DensityMatrix, EvolveOptions, ModelParams, MomentState, Trajectory,
};
use fermidicke::hilbert::{all_parent_state, Basis, StatisticsConfig};

use super::classify::env_max_dim;
use crate::config::Engine;
use crate::error::{CliError, CliResult};

/// Default run length: ten Rabi periods of `n_C` without loss or with weak
/// damping, five `1/(N Gamma_0)` in the bad cavity, and five slow decay
/// times `1/|lambda_+|` once dephasing acts on a lossy cavity.
pub fn default_t_max(p: &ModelParams) -> CliResult<f64> {
    let t = if p.kappa > 0.0 && p.kappa_phi > 0.0 {
        5.0 / dephasing_decay_rates(p)?.lambda_plus.abs()
    } else {
        match regime_classify(p).cavity {
            CavityRegime::Lossless | CavityRegime::WeakDamping => 10.0 * PI / p.g_sqrt_n(),
            CavityRegime::BadCavity => 5.0 / (p.n as f64 * p.gamma0()?),
        }
    };
    if t.is_finite() && t > 0.0 {
        Ok(t)
    } else {
        Err(CliError::Usage(
            "no natural time scale for these parameters; give t_max".into(),
        ))
    }
}

pub fn check_tolerances(rtol: f64, atol: f64) -> CliResult<()> {
    for (name, v) in [("rtol", rtol), ("atol", atol)] {
        if !(v > 0.0 && v.is_finite()) {
            return Err(CliError::Usage(format!("{name} must be positive, got {v}")));
        }
    }
    Ok(())
}

pub fn options(rtol: f64, atol: f64) -> CliResult<EvolveOptions> {
    check_tolerances(rtol, atol)?;
    let mut o = EvolveOptions {
        rtol,
        atol,
        ..EvolveOptions::default()
    };
    if let Some(cap) = env_max_dim()? {
        o.max_dim = cap;
    }
    Ok(o)
}

pub struct Run {
    pub trajectory: Trajectory,
    /// Density-matrix runs only.
    pub diagnostics: Option<CheckpointDiagnostics>,
    pub dim: usize,
}

/// Evolves the all-parent state with an empty cavity.
pub fn simulate(
    stats: StatisticsConfig,
    engine: Engine,
    p: &ModelParams,
    grid: &[f64],
    opts: &EvolveOptions,
) -> CliResult<Run> {
    match engine {
        Engine::Moments => {
            if !stats.emits_fermion() {
                return Err(CliError::Usage(
                    "the moment engine is exact only for fermionic emission; use engine density"
                        .into(),
                ));
            }
            let trajectory = evolve_moments(MomentState::all_parent(), p, grid, opts)?;
            Ok(Run {
                trajectory,
                diagnostics: None,
                dim: 5,
            })
        }
        Engine::Density => {
            let basis = Basis::with_cap(p.n, 1, stats, opts.max_dim)?;
            let rho0 = DensityMatrix::from_pure(&all_parent_state(&basis));
            let run = evolve_density_matrix(&basis, &rho0, p, grid, opts)?;
            Ok(Run {
                trajectory: run.trajectory,
                diagnostics: Some(run.diagnostics),
                dim: basis.dim(),
            })
        }
    }
}

/// Angular frequency of `n_C - n_nu` from its zero crossings; `None` with
/// fewer than two crossings.
pub fn rabi_frequency(tr: &Trajectory) -> Option<f64> {
    let pts = tr.points();
    let mut crossings = Vec::new();
    for w in pts.windows(2) {
        let (a, b) = (w[0].n_c - w[0].n_nu, w[1].n_c - w[1].n_nu);
        if a == 0.0 {
            crossings.push(w[0].t);
        } else if a * b < 0.0 {
            crossings.push(w[0].t + (w[1].t - w[0].t) * a / (a - b));
        }
    }
    if crossings.len() < 2 {
        return None;
    }
    let spacing = (crossings[crossings.len() - 1] - crossings[0]) / (crossings.len() - 1) as f64;
    // n_C - n_nu = cos(2 w t) crosses zero every pi / (2 w).
    Some(PI / (2.0 * spacing))
}
