//! Collective jump and mode operators built from the site emission
//! operators, bright/dark classification of the emission-rate operator
//! `L^dagger L`, and the sector structure of multi-mode emission.
//!
//! Throughout, a "mode operator" is the emission-direction combination
//! `sum_j w_j c_j` of site jump operators; for fermionic emission it creates a
//! collective fermionic excitation, so the all-parent state is the vacuum of
//! every collective mode.

mod classify;
mod modes;
mod sectors;

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::hilbert::{site_jump_operator, Basis, SparseOperator, StateVector};

pub use classify::{
    classify_states, excitation_resolved_classification, Classification, ClassifiedState,
    EigenGroup, ExcitationCounts,
};
pub use modes::CollectiveModeSet;
pub use sectors::{
    expected_rate_multiset, multimode_sector_graph, sector_rate_spectrum, SectorEdge, SectorGraph,
    SectorNode,
};

/// `sum_j weights[j] * c_j` over the sites of `basis`.
pub fn mode_operator(basis: &Basis, weights: &[C64]) -> Result<SparseOperator> {
    if weights.len() != basis.n_sites() {
        return Err(Error::DimensionMismatch {
            left: weights.len(),
            right: basis.n_sites(),
        });
    }
    let mut triplets = Vec::new();
    for (j, &w) in weights.iter().enumerate() {
        let c = site_jump_operator(basis, j)?;
        triplets.extend(c.triplets().map(|(r, col, v)| (r, col, v * w)));
    }
    SparseOperator::from_triplets(basis.dim(), triplets)
}

/// The bright collective operator `C = sum_i c_i / sqrt(N)`.
pub fn collective_operator(basis: &Basis) -> Result<SparseOperator> {
    let w = C64::new(1.0 / (basis.n_sites() as f64).sqrt(), 0.0);
    mode_operator(basis, &vec![w; basis.n_sites()])
}

/// Collective emission jump `L = sqrt(N Gamma_0) C`.
///
/// For fermion -> boson decay this is the adjoint of the `f^dagger b`
/// collective operator, i.e. it is always the operator that removes a parent
/// atom. For boson -> boson it reduces to `sqrt(Gamma_0) S^-`.
pub fn collective_jump(basis: &Basis, gamma0: f64) -> Result<SparseOperator> {
    if !(gamma0 >= 0.0 && gamma0.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "decay rate must be finite and non-negative, got {gamma0}"
        )));
    }
    let n = basis.n_sites() as f64;
    let w = C64::new((n * gamma0).sqrt() / n.sqrt(), 0.0);
    mode_operator(basis, &vec![w; basis.n_sites()])
}

/// Discrete-Fourier collective mode `sum_j e^{i j 2 pi k / N} c_j / sqrt(N)`.
/// Mode 0 coincides with [`collective_operator`].
pub fn collective_mode_operator(basis: &Basis, k: usize) -> Result<SparseOperator> {
    let n = basis.n_sites();
    if k >= n {
        return Err(Error::IndexOutOfRange {
            what: "collective mode",
            index: k,
            len: n,
        });
    }
    mode_operator(basis, &modes::dft_row(n, k))
}

/// Largest entry magnitude of `L^2`; exactly zero for fermionic emission.
pub fn nilpotency_check(l: &SparseOperator) -> f64 {
    l.matmul(l).expect("square operator").max_abs()
}

/// `n_0 = <C^dagger C>`; the emission rate of `psi` is `N Gamma_0 n_0`.
pub fn bright_mode_population(basis: &Basis, psi: &StateVector) -> Result<f64> {
    let c = collective_operator(basis)?;
    Ok(c.apply(psi)?.norm_sqr())
}
