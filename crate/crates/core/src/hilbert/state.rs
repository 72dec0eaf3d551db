use num_complex::Complex64 as C64;
use serde::Serialize;

use super::Basis;
use crate::error::{Error, Result};

/// Complex amplitude vector on a [`Basis`].
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct StateVector {
    amplitudes: Vec<C64>,
}

impl StateVector {
    pub fn from_amplitudes(amplitudes: Vec<C64>) -> Self {
        Self { amplitudes }
    }

    pub fn basis_state(dim: usize, index: usize) -> Self {
        let mut amplitudes = vec![C64::new(0.0, 0.0); dim];
        amplitudes[index] = C64::new(1.0, 0.0);
        Self { amplitudes }
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amplitudes
    }

    pub fn into_amplitudes(self) -> Vec<C64> {
        self.amplitudes
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    /// Scaled copy with unit norm; `None` for the zero vector.
    pub fn normalized(&self) -> Option<Self> {
        let n = self.norm();
        if n == 0.0 {
            return None;
        }
        Some(self.scaled(C64::new(1.0 / n, 0.0)))
    }

    pub fn scaled(&self, s: C64) -> Self {
        Self::from_amplitudes(self.amplitudes.iter().map(|a| a * s).collect())
    }

    /// `<self|other>`, antilinear in `self`.
    pub fn inner(&self, other: &Self) -> C64 {
        debug_assert_eq!(self.dim(), other.dim());
        self.amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| a.conj() * b)
            .sum()
    }

    /// `self + s * other`
    pub fn add_scaled(&self, s: C64, other: &Self) -> Result<Self> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch {
                left: self.dim(),
                right: other.dim(),
            });
        }
        Ok(Self::from_amplitudes(
            self.amplitudes
                .iter()
                .zip(&other.amplitudes)
                .map(|(a, b)| a + s * b)
                .collect(),
        ))
    }
}

/// Every site in the parent state, radiation modes empty (basis index 0).
pub fn all_parent_state(basis: &Basis) -> StateVector {
    StateVector::basis_state(basis.dim(), 0)
}

/// Every site in the daughter state, radiation modes empty.
pub fn all_daughter_state(basis: &Basis) -> StateVector {
    let zeros = vec![0; basis.n_modes()];
    StateVector::basis_state(basis.dim(), basis.index(basis.site_dim() - 1, &zeros))
}

/// `prod_i (|g> + e^{i alpha_i}|e>)/sqrt(2)` with every radiation mode empty.
///
/// The product is taken in ascending site order, which is the ordering the
/// basis kets themselves use, so each configuration simply picks up the
/// phases of its parent sites.
pub fn product_superposition_state(basis: &Basis, phases: &[f64]) -> Result<StateVector> {
    let n = basis.n_sites();
    if phases.len() != n {
        return Err(Error::DimensionMismatch {
            left: phases.len(),
            right: n,
        });
    }
    let weight = 0.5f64.powf(n as f64 / 2.0);
    let zeros = vec![0; basis.n_modes()];
    let mut amplitudes = vec![C64::new(0.0, 0.0); basis.dim()];
    for config in 0..basis.site_dim() {
        let phase: f64 = (0..n)
            .filter(|&i| Basis::is_parent(config, i))
            .map(|i| phases[i])
            .sum();
        amplitudes[basis.index(config, &zeros)] = C64::from_polar(weight, phase);
    }
    Ok(StateVector::from_amplitudes(amplitudes))
}
