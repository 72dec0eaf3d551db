//! Time evolution: the full Lindblad master equation on the composite
//! atom + cavity space, the closed second-moment equations, closed-form
//! limits, and regime labels.
//!
//! The cavity couples through `H = g sqrt(N) (nu^dagger C + C^dagger nu)` and
//! leaks through `sqrt(kappa) nu`; dephasing acts through `sqrt(kappa_phi) n_i`
//! on every site. `C` is the bright collective emission operator.

mod lindblad;
mod moments;
pub mod ode;
mod trajectory;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use lindblad::{
    evolve_density_matrix, hamiltonian, lindblad_rhs, moments_of, CheckpointDiagnostics,
    DensityMatrix, DensityRun, EvolveOptions, Lindbladian, Observables,
};
pub use moments::{evolve_moments, moment_rhs_cavity, moment_rhs_dephasing, MomentState};
pub use trajectory::{emission_count, fit_decay_rate, linear_grid, Trajectory, TrajectoryPoint};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    pub g: f64,
    pub n: usize,
    pub kappa: f64,
    pub kappa_phi: f64,
}

impl ModelParams {
    pub fn new(g: f64, n: usize, kappa: f64, kappa_phi: f64) -> Result<Self> {
        let p = Self {
            g,
            n,
            kappa,
            kappa_phi,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(Error::InvalidParameter("need at least one site".into()));
        }
        for (name, v) in [
            ("g", self.g),
            ("kappa", self.kappa),
            ("kappa_phi", self.kappa_phi),
        ] {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(Error::InvalidParameter(format!(
                    "{name} must be finite and non-negative, got {v}"
                )));
            }
        }
        Ok(())
    }

    /// Collective Rabi frequency `g sqrt(N)`.
    pub fn g_sqrt_n(&self) -> f64 {
        self.g * (self.n as f64).sqrt()
    }

    /// `Gamma_0 = 4 g^2 / kappa`; undefined without cavity loss.
    pub fn gamma0(&self) -> Result<f64> {
        if self.kappa > 0.0 {
            Ok(4.0 * self.g * self.g / self.kappa)
        } else {
            Err(Error::InvalidParameter(
                "Gamma_0 = 4 g^2 / kappa needs kappa > 0".into(),
            ))
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CavityRegime {
    Lossless,
    WeakDamping,
    BadCavity,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DephasingRegime {
    NoDephasing,
    WeakDephasing,
    StrongDephasing,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RegimeReport {
    pub cavity: CavityRegime,
    pub dephasing: DephasingRegime,
    /// Set when a parameter sits between the clean thresholds and the label
    /// is only the nearest regime.
    pub warnings: Vec<String>,
}

impl CavityRegime {
    pub fn name(self) -> &'static str {
        match self {
            Self::Lossless => "lossless",
            Self::WeakDamping => "weak_damping",
            Self::BadCavity => "bad_cavity",
        }
    }
}

impl DephasingRegime {
    pub fn name(self) -> &'static str {
        match self {
            Self::NoDephasing => "no_dephasing",
            Self::WeakDephasing => "weak_dephasing",
            Self::StrongDephasing => "strong_dephasing",
        }
    }
}

/// Lossless for `kappa = 0`, weak damping for `kappa < g sqrt(N)`, bad
/// cavity for `kappa >= 10 g sqrt(N)`; in between, the nearer one on a log
/// scale. Dephasing splits at `kappa_phi = N Gamma_0` and is flagged within a
/// decade of it.
pub fn regime_classify(params: &ModelParams) -> RegimeReport {
    let mut warnings = Vec::new();
    let gsn = params.g_sqrt_n();
    let cavity = if params.kappa == 0.0 {
        CavityRegime::Lossless
    } else if gsn == 0.0 {
        CavityRegime::BadCavity
    } else {
        let ratio = params.kappa / gsn;
        if ratio < 1.0 {
            CavityRegime::WeakDamping
        } else if ratio >= 10.0 {
            CavityRegime::BadCavity
        } else {
            let label = if ratio.log10() < 0.5 {
                CavityRegime::WeakDamping
            } else {
                CavityRegime::BadCavity
            };
            warnings.push(format!(
                "kappa / (g sqrt(N)) = {ratio} lies between 1 and 10; labelled {}",
                label.name()
            ));
            label
        }
    };
    let dephasing = if params.kappa_phi == 0.0 {
        DephasingRegime::NoDephasing
    } else {
        match params.gamma0() {
            Err(_) => {
                warnings
                    .push("kappa = 0 makes N Gamma_0 unbounded; dephasing labelled weak".into());
                DephasingRegime::WeakDephasing
            }
            Ok(g0) => {
                let ratio = params.kappa_phi / (params.n as f64 * g0);
                if (0.1..=10.0).contains(&ratio) {
                    warnings.push(format!(
                        "kappa_phi / (N Gamma_0) = {ratio} is within a decade of 1"
                    ));
                }
                if ratio < 1.0 {
                    DephasingRegime::WeakDephasing
                } else {
                    DephasingRegime::StrongDephasing
                }
            }
        }
    };
    RegimeReport {
        cavity,
        dephasing,
        warnings,
    }
}

/// Closed-form bright-mode population for an initially fully bright state
/// with an empty cavity.
pub fn analytic_n0(regime: CavityRegime, params: &ModelParams, t: f64) -> Result<f64> {
    let gsn = params.g_sqrt_n();
    match regime {
        CavityRegime::Lossless => Ok((gsn * t).cos().powi(2)),
        CavityRegime::WeakDamping => {
            if gsn == 0.0 {
                return Err(Error::InvalidParameter(
                    "weak-damping form needs g > 0".into(),
                ));
            }
            let w = 2.0 * gsn * t;
            Ok((-params.kappa * t / 2.0).exp() / 2.0
                * (1.0 + w.cos() + params.kappa * w.sin() / (4.0 * gsn)))
        }
        CavityRegime::BadCavity => {
            let g0 = params.gamma0()?;
            Ok((-(params.n as f64) * g0 * t).exp())
        }
    }
}

/// A warning when `regime` is not the one [`regime_classify`] assigns.
pub fn regime_mismatch(regime: CavityRegime, params: &ModelParams) -> Option<String> {
    let actual = regime_classify(params).cavity;
    (actual != regime).then(|| {
        format!(
            "{} form requested but parameters are {} (kappa / (g sqrt(N)) = {})",
            regime.name(),
            actual.name(),
            params.kappa / params.g_sqrt_n()
        )
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct DephasingRates {
    /// Slow eigenvalue, closest to zero.
    pub lambda_plus: f64,
    pub lambda_minus: f64,
    pub regime: DephasingRegime,
    /// Limiting decay rates `(slow, fast)`: `(kappa_phi/N, N Gamma_0)` for
    /// weak dephasing, `(Gamma_0, kappa_phi)` for strong.
    pub asymptotic: (f64, f64),
}

/// Eigenvalues of the adiabatic `(n_C, x)` system,
/// `-(N Gamma_0 + kappa_phi)/2 +- sqrt((N Gamma_0 + kappa_phi)^2 - 4 Gamma_0 kappa_phi)/2`.
pub fn dephasing_decay_rates(params: &ModelParams) -> Result<DephasingRates> {
    let g0 = params.gamma0()?;
    let n = params.n as f64;
    let ng = n * g0;
    let kp = params.kappa_phi;
    // (N G + k)^2 - 4 G k rewritten without cancellation.
    let disc = (ng - kp).powi(2) + 4.0 * g0 * kp * (n - 1.0);
    let lambda_minus = -((ng + kp) + disc.sqrt()) / 2.0;
    let lambda_plus = if lambda_minus == 0.0 {
        0.0
    } else {
        g0 * kp / lambda_minus
    };
    let (regime, asymptotic) = if kp == 0.0 {
        (DephasingRegime::NoDephasing, (0.0, ng))
    } else if kp < ng {
        (DephasingRegime::WeakDephasing, (kp / n, ng))
    } else {
        (DephasingRegime::StrongDephasing, (g0, kp))
    };
    Ok(DephasingRates {
        lambda_plus,
        lambda_minus,
        regime,
        asymptotic,
    })
}

/// `[[-N Gamma_0, -kappa_phi], [-N Gamma_0 (1 - 1/N), -kappa_phi]]` acting
/// on `(n_C, x)` with `x = n_C - n_bar`.
pub fn adiabatic_matrix(params: &ModelParams) -> Result<[[f64; 2]; 2]> {
    let g0 = params.gamma0()?;
    let n = params.n as f64;
    let kp = params.kappa_phi;
    Ok([[-n * g0, -kp], [-n * g0 * (1.0 - 1.0 / n), -kp]])
}

pub fn adiabatic_2x2_rhs(state: [f64; 2], params: &ModelParams) -> Result<[f64; 2]> {
    let m = adiabatic_matrix(params)?;
    Ok([
        m[0][0] * state[0] + m[0][1] * state[1],
        m[1][0] * state[0] + m[1][1] * state[1],
    ])
}
