//! Closed-form emission rates of product superposition states, and the
//! brute-force expectation value they are checked against.
//!
//! Phases enter as `(|g> + e^{i alpha_j}|e>)/sqrt(2)` on site `j`; a uniform
//! neighbour phase difference `phi` means `alpha_j = j phi`.

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hilbert::{SparseOperator, StateVector, StatisticsConfig};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RateParams {
    pub n: usize,
    pub gamma0: f64,
    /// Neighbour phase difference, used when `phases` is absent.
    pub phi: f64,
    pub phases: Option<Vec<f64>>,
}

impl RateParams {
    pub fn uniform(n: usize, gamma0: f64, phi: f64) -> Result<Self> {
        let p = Self {
            n,
            gamma0,
            phi,
            phases: None,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn with_phases(gamma0: f64, phases: Vec<f64>) -> Result<Self> {
        let p = Self {
            n: phases.len(),
            gamma0,
            phi: 0.0,
            phases: Some(phases),
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(Error::InvalidParameter("need at least one site".into()));
        }
        if !(self.gamma0 > 0.0 && self.gamma0.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "Gamma_0 must be positive, got {}",
                self.gamma0
            )));
        }
        if let Some(ph) = &self.phases {
            if ph.len() != self.n {
                return Err(Error::DimensionMismatch {
                    left: ph.len(),
                    right: self.n,
                });
            }
        }
        Ok(())
    }

    /// Per-site phases, expanding a uniform `phi` if none were given.
    pub fn site_phases(&self) -> Vec<f64> {
        match &self.phases {
            Some(ph) => ph.clone(),
            None => uniform_phases(self.n, self.phi),
        }
    }
}

/// `alpha_j = j phi`.
pub fn uniform_phases(n: usize, phi: f64) -> Vec<f64> {
    (0..n).map(|j| j as f64 * phi).collect()
}

/// `Gamma_0 ((N-1)/2 (1 - cos phi) + 1/2)`: boson parent, fermion daughter.
pub fn rate_fermionic_product_state(params: &RateParams) -> f64 {
    let n = params.n as f64;
    params.gamma0 * ((n - 1.0) / 2.0 * (1.0 - params.phi.cos()) + 0.5)
}

/// `Gamma_0 ((N-1)/2 (1 + cos phi) + 1/2)`: fermion parent, boson daughter.
pub fn rate_fermion_parent_product_state(params: &RateParams) -> f64 {
    let n = params.n as f64;
    params.gamma0 * ((n - 1.0) / 2.0 * (1.0 + params.phi.cos()) + 0.5)
}

/// `Gamma_0 N (N+1) / 4` for equal phases and bosonic emission.
pub fn rate_bosonic_product_state(n: usize, gamma0: f64) -> f64 {
    let n = n as f64;
    gamma0 * n * (n + 1.0) / 4.0
}

/// `<c_i^dagger c_j>` in the boson -> fermion product state with phases
/// `alphas`: `1/2` on the diagonal, `-e^{i(alpha_j - alpha_i)}/4` for
/// nearest neighbours, zero otherwise.
pub fn correlation_element(i: usize, j: usize, alphas: &[f64]) -> C64 {
    correlation_element_for(StatisticsConfig::BOSON_FERMION, i, j, alphas)
}

/// [`correlation_element`] for any statistics. With a fermionic parent the
/// neighbour term changes sign; with bosonic emission every pair contributes
/// `+e^{i(alpha_j - alpha_i)}/4`.
pub fn correlation_element_for(stats: StatisticsConfig, i: usize, j: usize, alphas: &[f64]) -> C64 {
    if i == j {
        return C64::new(0.5, 0.0);
    }
    let phase = C64::from_polar(0.25, alphas[j] - alphas[i]);
    if !stats.emits_fermion() {
        return phase;
    }
    if i.abs_diff(j) != 1 {
        return C64::new(0.0, 0.0);
    }
    if stats == StatisticsConfig::BOSON_FERMION {
        -phase
    } else {
        phase
    }
}

/// `Gamma_0 sum_ij <c_i^dagger c_j>` from the closed-form elements.
pub fn closed_form_rate(stats: StatisticsConfig, params: &RateParams) -> f64 {
    let alphas = params.site_phases();
    let n = alphas.len();
    let mut sum = C64::new(0.0, 0.0);
    for i in 0..n {
        for j in 0..n {
            sum += correlation_element_for(stats, i, j, &alphas);
        }
    }
    params.gamma0 * sum.re
}

/// `<psi| L^dagger L |psi> = ||L psi||^2`.
pub fn rate_numeric(psi: &StateVector, l: &SparseOperator) -> Result<f64> {
    Ok(l.apply(psi)?.norm_sqr())
}

/// `N Gamma_0`, the largest eigenvalue of `L^dagger L` for fermionic
/// emission.
pub fn max_rate_bound(n: usize, gamma0: f64) -> f64 {
    n as f64 * gamma0
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::collective::{classify_states, collective_jump};
    use crate::hilbert::{all_daughter_state, product_superposition_state, Basis};
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::{FRAC_PI_2, PI};

    const SEED: u64 = 0x5eed_0001;

    fn numeric(stats: StatisticsConfig, alphas: &[f64], gamma0: f64) -> f64 {
        let b = Basis::new(alphas.len(), 0, stats).unwrap();
        let psi = product_superposition_state(&b, alphas).unwrap();
        rate_numeric(&psi, &collective_jump(&b, gamma0).unwrap()).unwrap()
    }

    #[test]
    fn formula_examples() {
        let p = |n, phi| RateParams::uniform(n, 1.0, phi).unwrap();
        assert!((rate_fermionic_product_state(&p(2, PI)) - 1.5).abs() < 1e-15);
        for n in 1..8 {
            assert!((rate_fermionic_product_state(&p(n, 0.0)) - 0.5).abs() < 1e-15);
        }
        assert!((rate_fermion_parent_product_state(&p(3, 0.0)) - 2.5).abs() < 1e-15);
        assert!((rate_fermion_parent_product_state(&p(3, PI)) - 0.5).abs() < 1e-15);
        assert!((rate_fermion_parent_product_state(&p(1, 1.3)) - 0.5).abs() < 1e-15);
        assert_eq!(rate_bosonic_product_state(2, 1.0), 1.5);
        assert_eq!(rate_bosonic_product_state(3, 1.0), 3.0);
        assert_eq!(rate_bosonic_product_state(1, 1.0), 0.5);
    }

    #[test]
    fn correlation_examples() {
        let a = [0.0; 4];
        assert_eq!(correlation_element(1, 1, &a), C64::new(0.5, 0.0));
        assert_eq!(correlation_element(1, 2, &a), C64::new(-0.25, 0.0));
        assert_eq!(correlation_element(0, 2, &a), C64::new(0.0, 0.0));
    }

    #[test]
    fn quarter_turn_four_sites() {
        let p = RateParams::uniform(4, 1.0, FRAC_PI_2).unwrap();
        let formula = rate_fermionic_product_state(&p);
        assert!((formula - 2.0).abs() < 1e-15);
        let got = numeric(StatisticsConfig::BOSON_FERMION, &p.site_phases(), 1.0);
        assert!((got - formula).abs() < 1e-10);
    }

    #[test]
    fn six_sites_random_phases() {
        let mut rng = ChaCha8Rng::seed_from_u64(SEED);
        let alphas: Vec<f64> = (0..6).map(|_| rng.random_range(0.0..2.0 * PI)).collect();
        let p = RateParams::with_phases(1.0, alphas.clone()).unwrap();
        for stats in StatisticsConfig::ALL {
            let got = numeric(stats, &alphas, 1.0);
            assert!((got - closed_form_rate(stats, &p)).abs() < 1e-10, "{stats}");
        }
    }

    #[test]
    fn all_daughter_is_dark() {
        let b = Basis::new(4, 0, StatisticsConfig::BOSON_FERMION).unwrap();
        let l = collective_jump(&b, 1.0).unwrap();
        assert_eq!(rate_numeric(&all_daughter_state(&b), &l).unwrap(), 0.0);
    }

    #[test]
    fn bound_is_top_eigenvalue() {
        let b = Basis::new(5, 0, StatisticsConfig::BOSON_FERMION).unwrap();
        let c = classify_states(&b, &collective_jump(&b, 1.0).unwrap()).unwrap();
        assert!((c.max_rate() - max_rate_bound(5, 1.0)).abs() < 1e-9);
        assert_eq!(max_rate_bound(1, 1.0), 1.0);
    }

    #[test]
    fn bosonic_top_rate_exceeds_bound_at_four_sites() {
        let bb = Basis::new(4, 0, StatisticsConfig::BOSON_BOSON).unwrap();
        let top = classify_states(&bb, &collective_jump(&bb, 1.0).unwrap())
            .unwrap()
            .max_rate();
        // S = 2, m = 0: S(S+1) - m(m-1) = 6
        assert!((top - 6.0).abs() < 1e-9);
        assert!(top > max_rate_bound(4, 1.0));
        let bf = Basis::new(4, 0, StatisticsConfig::BOSON_FERMION).unwrap();
        let top = classify_states(&bf, &collective_jump(&bf, 1.0).unwrap())
            .unwrap()
            .max_rate();
        assert!(top <= max_rate_bound(4, 1.0) * (1.0 + 1e-9));
    }

    #[test]
    fn bosonic_to_fermionic_ratio_grows() {
        let ratios: Vec<f64> = (1..=10)
            .map(|n| {
                let fmax = rate_fermionic_product_state(&RateParams::uniform(n, 1.0, PI).unwrap());
                rate_bosonic_product_state(n, 1.0) / fmax
            })
            .collect();
        // N = 1 and N = 2 both give exactly 1.
        assert_eq!(ratios[0], ratios[1]);
        assert!(ratios[1..].windows(2).all(|w| w[1] > w[0]));
    }

    #[test]
    fn fermionic_product_rate_stays_below_bound() {
        for n in 1..=10 {
            let at_pi = rate_fermionic_product_state(&RateParams::uniform(n, 1.0, PI).unwrap());
            assert!((at_pi - (n as f64 - 0.5)).abs() < 1e-12);
            assert!(at_pi < max_rate_bound(n, 1.0));
        }
    }

    #[test]
    fn rejects_bad_params() {
        assert!(RateParams::uniform(0, 1.0, 0.0).is_err());
        assert!(RateParams::uniform(3, 0.0, 0.0).is_err());
        assert!(RateParams::uniform(3, f64::NAN, 0.0).is_err());
    }

    proptest! {
        #[test]
        fn correlation_is_hermitian(
            alphas in prop::collection::vec(-10.0f64..10.0, 1..8),
            si in 0usize..3,
            i in 0usize..8,
            j in 0usize..8,
        ) {
            let n = alphas.len();
            let (i, j) = (i % n, j % n);
            let stats = StatisticsConfig::ALL[si];
            let a = correlation_element_for(stats, i, j, &alphas);
            let b = correlation_element_for(stats, j, i, &alphas).conj();
            prop_assert!((a - b).norm() < 1e-15);
        }

        #[test]
        fn uniform_formulas_match_numeric(n in 1usize..=7, phi in -PI..PI, gamma0 in 0.1f64..3.0) {
            let p = RateParams::uniform(n, gamma0, phi).unwrap();
            let alphas = p.site_phases();
            let bf = numeric(StatisticsConfig::BOSON_FERMION, &alphas, gamma0);
            let fb = numeric(StatisticsConfig::FERMION_BOSON, &alphas, gamma0);
            let tol = 1e-10 * n as f64 * gamma0;
            prop_assert!((bf - rate_fermionic_product_state(&p)).abs() < tol);
            prop_assert!((fb - rate_fermion_parent_product_state(&p)).abs() < tol);
        }

        #[test]
        fn closed_form_matches_numeric(alphas in prop::collection::vec(0.0f64..6.3, 1..=7), si in 0usize..3) {
            let stats = StatisticsConfig::ALL[si];
            let p = RateParams::with_phases(1.0, alphas.clone()).unwrap();
            let got = numeric(stats, &alphas, 1.0);
            prop_assert!((got - closed_form_rate(stats, &p)).abs() < 1e-10 * alphas.len() as f64);
        }

        #[test]
        fn bosonic_equal_phase_rate(n in 1usize..=7, c in 0.0f64..6.3) {
            let got = numeric(StatisticsConfig::BOSON_BOSON, &vec![c; n], 1.0);
            prop_assert!((got - rate_bosonic_product_state(n, 1.0)).abs() < 1e-10 * n as f64);
        }
    }
}
