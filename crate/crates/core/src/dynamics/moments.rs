use serde::{Deserialize, Serialize};

use super::lindblad::EvolveOptions;
use super::ode::{integrate, OdeSystem};
use super::trajectory::{Trajectory, TrajectoryPoint};
use super::ModelParams;
use crate::error::Result;

/// `n_C = <C^dagger C>`, `n_nu = <nu^dagger nu>`, `r + i u = <nu C^dagger>`,
/// `n_bar = sum_i <n_i> / N`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct MomentState {
    pub n_c: f64,
    pub n_nu: f64,
    pub r: f64,
    pub u: f64,
    pub n_bar: f64,
}

impl MomentState {
    /// All atoms in the parent state, empty cavity.
    pub fn all_parent() -> Self {
        Self {
            n_c: 1.0,
            n_bar: 1.0,
            ..Self::default()
        }
    }

    pub fn to_array(self) -> [f64; 5] {
        [self.n_c, self.n_nu, self.r, self.u, self.n_bar]
    }

    pub fn from_array(a: [f64; 5]) -> Self {
        Self {
            n_c: a[0],
            n_nu: a[1],
            r: a[2],
            u: a[3],
            n_bar: a[4],
        }
    }
}

/// Four-variable cavity system; `n_bar` is not part of it and its entry in
/// the result is zero. `kappa_phi` is ignored.
pub fn moment_rhs_cavity(m: &MomentState, params: &ModelParams) -> MomentState {
    let gsn = params.g_sqrt_n();
    let k = params.kappa;
    MomentState {
        n_c: -2.0 * gsn * m.u,
        n_nu: 2.0 * gsn * m.u - k * m.n_nu,
        r: -k / 2.0 * m.r,
        u: gsn * (m.n_c - m.n_nu) - k / 2.0 * m.u,
        n_bar: 0.0,
    }
}

/// Five-variable system with per-site dephasing.
pub fn moment_rhs_dephasing(m: &MomentState, params: &ModelParams) -> MomentState {
    let gsn = params.g_sqrt_n();
    let k = params.kappa;
    let kp = params.kappa_phi;
    let n = params.n as f64;
    MomentState {
        n_c: -2.0 * gsn * m.u - kp * (m.n_c - m.n_bar),
        n_nu: 2.0 * gsn * m.u - k * m.n_nu,
        r: -(k + kp) / 2.0 * m.r,
        u: gsn * (m.n_c - m.n_nu) - (k + kp) / 2.0 * m.u,
        n_bar: -2.0 * gsn / n * m.u,
    }
}

struct MomentSystem(ModelParams);

impl OdeSystem for MomentSystem {
    fn rhs(&mut self, _t: f64, y: &[f64], dy: &mut [f64]) {
        let m = MomentState::from_array([y[0], y[1], y[2], y[3], y[4]]);
        let d = moment_rhs_dephasing(&m, &self.0);
        dy[..5].copy_from_slice(&d.to_array());
        dy[5] = self.0.kappa * y[1];
    }
}

/// Integrates the five-variable moment system together with the emitted
/// count `int kappa n_nu dt`.
pub fn evolve_moments(
    m0: MomentState,
    params: &ModelParams,
    t_grid: &[f64],
    opts: &EvolveOptions,
) -> Result<Trajectory> {
    params.validate()?;
    let mut y0 = m0.to_array().to_vec();
    y0.push(0.0);
    let mut points = Vec::with_capacity(t_grid.len());
    let stats = integrate(
        &mut MomentSystem(*params),
        t_grid,
        y0,
        &opts.ode(),
        |t, y| {
            points.push(TrajectoryPoint {
                t,
                n_c: y[0],
                n_nu: y[1],
                r: y[2],
                u: y[3],
                n_bar: y[4],
                emitted: y[5],
            });
            Ok(())
        },
    )?;
    Ok(Trajectory::new(points, stats))
}
