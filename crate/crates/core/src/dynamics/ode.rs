//! Dormand-Prince 5(4) with PI step control and fifth-order-consistent dense
//! output, driven to an arbitrary output grid.

use crate::error::{Error, Result};

/// Right-hand side of `y' = f(t, y)` plus an optional projection applied
/// after every accepted step.
pub trait OdeSystem {
    fn rhs(&mut self, t: f64, y: &[f64], dy: &mut [f64]);

    /// May modify `y` in place after an accepted step; return `true` if it
    /// did so the integrator re-evaluates the first stage.
    fn post_step(&mut self, _t: f64, _y: &mut [f64]) -> bool {
        false
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct OdeOptions {
    pub rtol: f64,
    pub atol: f64,
    pub max_steps: usize,
    pub h_max: Option<f64>,
}

impl Default for OdeOptions {
    fn default() -> Self {
        Self {
            rtol: 1e-8,
            atol: 1e-10,
            max_steps: 50_000_000,
            h_max: None,
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, serde::Serialize)]
pub struct OdeStats {
    pub accepted: usize,
    pub rejected: usize,
    pub evaluations: usize,
}

const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;
const D1: f64 = -12715105075.0 / 11282082432.0;
const D3: f64 = 87487479700.0 / 32700410799.0;
const D4: f64 = -10690763975.0 / 1880347072.0;
const D5: f64 = 701980252875.0 / 199316789632.0;
const D6: f64 = -1453857185.0 / 822651844.0;
const D7: f64 = 69997945.0 / 29380423.0;

const SAFETY: f64 = 0.9;
const FAC_MIN: f64 = 0.2;
const FAC_MAX: f64 = 10.0;
const BETA: f64 = 0.04;

struct Work {
    k: [Vec<f64>; 7],
    ytmp: Vec<f64>,
    ynew: Vec<f64>,
    dense: [Vec<f64>; 5],
    yout: Vec<f64>,
}

impl Work {
    fn new(n: usize) -> Self {
        let v = || vec![0.0; n];
        Self {
            k: [v(), v(), v(), v(), v(), v(), v()],
            ytmp: v(),
            ynew: v(),
            dense: [v(), v(), v(), v(), v()],
            yout: v(),
        }
    }
}

/// Weighted max norm. An RMS norm would be diluted by the many identically
/// zero entries of a density matrix.
fn error_norm(y: &[f64], ynew: &[f64], err: impl Fn(usize) -> f64, opts: &OdeOptions) -> f64 {
    (0..y.len()).fold(0.0, |acc: f64, i| {
        let sk = opts.atol + opts.rtol * y[i].abs().max(ynew[i].abs());
        let e = (err(i) / sk).abs();
        if e.is_nan() {
            f64::NAN
        } else {
            acc.max(e)
        }
    })
}

fn initial_step<S: OdeSystem>(
    sys: &mut S,
    t: f64,
    y: &[f64],
    f0: &[f64],
    opts: &OdeOptions,
    h_max: f64,
    work: &mut Work,
) -> f64 {
    let n = y.len().max(1) as f64;
    let sk = |i: usize| opts.atol + opts.rtol * y[i].abs();
    let dnf: f64 = (0..y.len()).map(|i| (f0[i] / sk(i)).powi(2)).sum::<f64>() / n;
    let dny: f64 = (0..y.len()).map(|i| (y[i] / sk(i)).powi(2)).sum::<f64>() / n;
    let mut h = if dnf <= 1e-10 || dny <= 1e-10 {
        1e-6
    } else {
        (dny / dnf).sqrt() * 0.01
    };
    h = h.min(h_max);
    for i in 0..y.len() {
        work.ytmp[i] = y[i] + h * f0[i];
    }
    let [_, f1, ..] = &mut work.k;
    sys.rhs(t + h, &work.ytmp, f1);
    let der2 = ((0..y.len())
        .map(|i| ((f1[i] - f0[i]) / sk(i)).powi(2))
        .sum::<f64>()
        / n)
        .sqrt()
        / h;
    let der12 = der2.max(dnf.sqrt());
    let h1 = if der12 <= 1e-15 {
        (h * 1e-3).max(1e-6)
    } else {
        (0.01 / der12).powf(0.2)
    };
    (100.0 * h).min(h1).min(h_max)
}

/// Integrates from `grid[0]` and calls `observe(t, y)` at every grid time.
/// The grid must be strictly increasing.
pub fn integrate<S, F>(
    sys: &mut S,
    grid: &[f64],
    y0: Vec<f64>,
    opts: &OdeOptions,
    mut observe: F,
) -> Result<OdeStats>
where
    S: OdeSystem,
    F: FnMut(f64, &[f64]) -> Result<()>,
{
    if grid.is_empty() {
        return Err(Error::InvalidParameter("empty time grid".into()));
    }
    if grid.windows(2).any(|w| w[1] <= w[0]) || grid.iter().any(|t| !t.is_finite()) {
        return Err(Error::InvalidParameter(
            "time grid must be finite and strictly increasing".into(),
        ));
    }
    if !(opts.rtol > 0.0 && opts.atol > 0.0) {
        return Err(Error::InvalidParameter(
            "tolerances must be positive".into(),
        ));
    }
    let n = y0.len();
    let mut stats = OdeStats::default();
    let mut t = grid[0];
    let t_end = *grid.last().unwrap();
    let mut y = y0;
    if y.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite { t });
    }
    observe(t, &y)?;
    if grid.len() == 1 {
        return Ok(stats);
    }
    let mut next = 1;
    let h_max = opts.h_max.unwrap_or(t_end - t).min(t_end - t);
    let mut w = Work::new(n);
    sys.rhs(t, &y, &mut w.k[0]);
    stats.evaluations += 1;
    let k0 = w.k[0].clone();
    let mut h = initial_step(sys, t, &y, &k0, opts, h_max, &mut w);
    stats.evaluations += 1;
    let mut fac_old = 1e-4f64;
    let expo1 = 0.2 - BETA * 0.75;
    let mut last_rejected = false;

    while next < grid.len() {
        if stats.accepted + stats.rejected >= opts.max_steps {
            return Err(Error::MaxSteps {
                max_steps: opts.max_steps,
                t,
            });
        }
        h = h.min(h_max);
        if t + 1.01 * h >= t_end {
            h = t_end - t;
        }
        if h <= 1e-14 * t.abs().max(1.0) {
            return Err(Error::StepSizeUnderflow { t, h });
        }

        let Work {
            k,
            ytmp,
            ynew,
            dense,
            yout,
        } = &mut w;
        let [k1, k2, k3, k4, k5, k6, k7] = k;
        for i in 0..n {
            ytmp[i] = y[i] + h * A21 * k1[i];
        }
        sys.rhs(t + C2 * h, ytmp, k2);
        for i in 0..n {
            ytmp[i] = y[i] + h * (A31 * k1[i] + A32 * k2[i]);
        }
        sys.rhs(t + C3 * h, ytmp, k3);
        for i in 0..n {
            ytmp[i] = y[i] + h * (A41 * k1[i] + A42 * k2[i] + A43 * k3[i]);
        }
        sys.rhs(t + C4 * h, ytmp, k4);
        for i in 0..n {
            ytmp[i] = y[i] + h * (A51 * k1[i] + A52 * k2[i] + A53 * k3[i] + A54 * k4[i]);
        }
        sys.rhs(t + C5 * h, ytmp, k5);
        for i in 0..n {
            ytmp[i] =
                y[i] + h * (A61 * k1[i] + A62 * k2[i] + A63 * k3[i] + A64 * k4[i] + A65 * k5[i]);
        }
        sys.rhs(t + h, ytmp, k6);
        for i in 0..n {
            ynew[i] =
                y[i] + h * (A71 * k1[i] + A73 * k3[i] + A74 * k4[i] + A75 * k5[i] + A76 * k6[i]);
        }
        sys.rhs(t + h, ynew, k7);
        stats.evaluations += 6;

        let err = error_norm(
            &y,
            ynew,
            |i| h * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]),
            opts,
        );

        if !err.is_finite() {
            stats.rejected += 1;
            h *= FAC_MIN;
            last_rejected = true;
            continue;
        }
        let fac11 = err.powf(expo1);
        if err <= 1.0 {
            let fac = (fac11 / fac_old.powf(BETA) / SAFETY).clamp(1.0 / FAC_MAX, 1.0 / FAC_MIN);
            let mut h_new = h / fac;
            fac_old = err.max(1e-4);
            stats.accepted += 1;

            let t_new = if h == t_end - t { t_end } else { t + h };
            for i in 0..n {
                let ydiff = ynew[i] - y[i];
                let bspl = h * k1[i] - ydiff;
                dense[0][i] = y[i];
                dense[1][i] = ydiff;
                dense[2][i] = bspl;
                dense[3][i] = ydiff - h * k7[i] - bspl;
                dense[4][i] = h
                    * (D1 * k1[i] + D3 * k3[i] + D4 * k4[i] + D5 * k5[i] + D6 * k6[i] + D7 * k7[i]);
            }
            while next < grid.len() && grid[next] <= t_new {
                let tout = grid[next];
                if tout == t_new {
                    yout.copy_from_slice(ynew);
                } else {
                    let theta = (tout - t) / h;
                    let theta1 = 1.0 - theta;
                    for i in 0..n {
                        yout[i] = dense[0][i]
                            + theta
                                * (dense[1][i]
                                    + theta1
                                        * (dense[2][i]
                                            + theta * (dense[3][i] + theta1 * dense[4][i])));
                    }
                }
                if yout.iter().any(|v| !v.is_finite()) {
                    return Err(Error::NonFinite { t: tout });
                }
                observe(tout, yout)?;
                next += 1;
            }

            t = t_new;
            std::mem::swap(&mut y, ynew);
            std::mem::swap(k1, k7);
            if sys.post_step(t, &mut y) {
                sys.rhs(t, &y, k1);
                stats.evaluations += 1;
            }
            if last_rejected {
                h_new = h_new.min(h);
            }
            last_rejected = false;
            h = h_new;
        } else {
            stats.rejected += 1;
            h /= (fac11 / SAFETY).min(1.0 / FAC_MIN);
            last_rejected = true;
        }
    }
    Ok(stats)
}
