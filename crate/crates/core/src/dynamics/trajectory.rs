use std::fmt::Write as _;

use serde::Serialize;

use super::ode::OdeStats;
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize)]
pub struct TrajectoryPoint {
    pub t: f64,
    pub n_c: f64,
    pub n_nu: f64,
    pub r: f64,
    pub u: f64,
    pub n_bar: f64,
    /// Cumulative `int_0^t kappa n_nu dt'`.
    pub emitted: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Trajectory {
    points: Vec<TrajectoryPoint>,
    #[serde(skip)]
    stats: OdeStats,
}

/// `points` evenly spaced times from 0 to `t_max` inclusive.
pub fn linear_grid(t_max: f64, points: usize) -> Result<Vec<f64>> {
    if points < 2 {
        return Err(Error::InvalidParameter(format!(
            "a time grid needs at least 2 points, got {points}"
        )));
    }
    if !(t_max > 0.0 && t_max.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "t_max must be positive, got {t_max}"
        )));
    }
    let last = (points - 1) as f64;
    Ok((0..points)
        .map(|i| {
            if i + 1 == points {
                t_max
            } else {
                t_max * i as f64 / last
            }
        })
        .collect())
}

impl Trajectory {
    pub fn new(points: Vec<TrajectoryPoint>, stats: OdeStats) -> Self {
        Self { points, stats }
    }

    pub fn points(&self) -> &[TrajectoryPoint] {
        &self.points
    }

    pub fn stats(&self) -> OdeStats {
        self.stats
    }

    pub fn times(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.t).collect()
    }

    /// Header `t,n_C,n_nu,n_bar,emitted`, 17 significant digits.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("t,n_C,n_nu,n_bar,emitted\n");
        for p in &self.points {
            writeln!(
                out,
                "{:.16e},{:.16e},{:.16e},{:.16e},{:.16e}",
                p.t, p.n_c, p.n_nu, p.n_bar, p.emitted
            )
            .unwrap();
        }
        out
    }

    /// Column arrays under the CSV field names.
    pub fn to_json_value(&self) -> serde_json::Value {
        let col =
            |f: fn(&TrajectoryPoint) -> f64| -> Vec<f64> { self.points.iter().map(f).collect() };
        serde_json::json!({
            "t": col(|p| p.t),
            "n_C": col(|p| p.n_c),
            "n_nu": col(|p| p.n_nu),
            "n_bar": col(|p| p.n_bar),
            "emitted": col(|p| p.emitted),
        })
    }

    /// Largest `|f(t) - n_C(t)|` over the grid.
    pub fn max_deviation(&self, f: impl Fn(f64) -> Result<f64>) -> Result<f64> {
        let mut worst = 0.0f64;
        for p in &self.points {
            worst = worst.max((f(p.t)? - p.n_c).abs());
        }
        Ok(worst)
    }
}

/// `(t, emitted)` pairs; requires a trajectory run with cavity loss.
pub fn emission_count(trajectory: &Trajectory, kappa: f64) -> Result<Vec<(f64, f64)>> {
    if kappa <= 0.0 {
        return Err(Error::InvalidParameter("emission needs kappa > 0".into()));
    }
    Ok(trajectory.points.iter().map(|p| (p.t, p.emitted)).collect())
}

/// Decay rate from a least-squares line through `ln y` over the second half
/// of the samples. Non-positive samples are skipped; `None` if fewer than
/// two remain.
pub fn fit_decay_rate(times: &[f64], values: &[f64]) -> Option<f64> {
    let start = times.len() / 2;
    let pts: Vec<(f64, f64)> = times[start..]
        .iter()
        .zip(&values[start..])
        .filter(|(_, v)| **v > 0.0 && v.is_finite())
        .map(|(t, v)| (*t, v.ln()))
        .collect();
    if pts.len() < 2 {
        return None;
    }
    let n = pts.len() as f64;
    let mt = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mt).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mt) * (p.1 - my)).sum();
    (sxx > 0.0).then(|| -sxy / sxx)
}
