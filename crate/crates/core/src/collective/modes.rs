use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use std::f64::consts::PI;

use crate::error::{Error, Result};

const ORTHONORMAL_TOL: f64 = 1e-12;

pub(crate) fn dft_row(n: usize, k: usize) -> Vec<C64> {
    let norm = 1.0 / (n as f64).sqrt();
    (0..n)
        .map(|j| {
            // Reduce the phase index first so k = 0 gives exactly 1.
            let p = (j * k) % n;
            if p == 0 {
                C64::new(norm, 0.0)
            } else {
                C64::from_polar(norm, 2.0 * PI * p as f64 / n as f64)
            }
        })
        .collect()
}

/// A set of `M` orthonormal collective emission modes over `N` sites.
///
/// Row `m` of `weights` holds the per-site couplings of mode `m`; the mode's
/// jump operator is `sqrt(N Gamma_m) sum_i w_{m,i} c_i`.
#[derive(Clone, Debug, PartialEq)]
pub struct CollectiveModeSet {
    weights: DMatrix<C64>,
    rates: Vec<f64>,
}

impl CollectiveModeSet {
    pub fn new(weights: DMatrix<C64>, rates: Vec<f64>) -> Result<Self> {
        let (m, n) = weights.shape();
        if m > n {
            return Err(Error::InvalidParameter(format!(
                "{m} modes cannot be orthonormal over {n} sites"
            )));
        }
        if rates.len() != m {
            return Err(Error::DimensionMismatch {
                left: rates.len(),
                right: m,
            });
        }
        if let Some(bad) = rates.iter().find(|r| !(r.is_finite() && **r >= 0.0)) {
            return Err(Error::InvalidParameter(format!(
                "mode rates must be finite and non-negative, got {bad}"
            )));
        }
        let gram = &weights * weights.adjoint();
        let residual = (gram - DMatrix::<C64>::identity(m, m))
            .iter()
            .map(|z| z.norm())
            .fold(0.0, f64::max);
        if residual > ORTHONORMAL_TOL {
            return Err(Error::NotOrthonormal { residual });
        }
        Ok(Self { weights, rates })
    }

    /// The first `n_modes` discrete-Fourier rows `e^{i j 2 pi k / N}/sqrt(N)`.
    pub fn dft(n_sites: usize, rates: Vec<f64>) -> Result<Self> {
        let m = rates.len();
        if m > n_sites {
            return Err(Error::InvalidParameter(format!(
                "{m} modes exceed {n_sites} sites"
            )));
        }
        let mut w = DMatrix::zeros(m, n_sites);
        for k in 0..m {
            for (j, z) in dft_row(n_sites, k).into_iter().enumerate() {
                w[(k, j)] = z;
            }
        }
        Self::new(w, rates)
    }

    pub fn dft_uniform(n_sites: usize, n_modes: usize, rate: f64) -> Result<Self> {
        Self::dft(n_sites, vec![rate; n_modes])
    }

    pub fn n_modes(&self) -> usize {
        self.weights.nrows()
    }

    pub fn n_sites(&self) -> usize {
        self.weights.ncols()
    }

    pub fn weights(&self) -> &DMatrix<C64> {
        &self.weights
    }

    pub fn row(&self, m: usize) -> Vec<C64> {
        self.weights.row(m).iter().copied().collect()
    }

    pub fn rates(&self) -> &[f64] {
        &self.rates
    }

    pub fn total_rate(&self) -> f64 {
        self.rates.iter().sum()
    }

    /// Extends the mode rows to a full `N x N` unitary. Candidates are the
    /// remaining Fourier rows, then unit vectors, each Gram-Schmidt
    /// orthogonalized (twice) against the rows already accepted.
    pub fn completed_unitary(&self) -> DMatrix<C64> {
        let n = self.n_sites();
        let mut rows: Vec<Vec<C64>> = (0..self.n_modes()).map(|m| self.row(m)).collect();
        let candidates = (0..n).map(|k| dft_row(n, k)).chain((0..n).map(|j| {
            let mut e = vec![C64::new(0.0, 0.0); n];
            e[j] = C64::new(1.0, 0.0);
            e
        }));
        for mut v in candidates {
            if rows.len() == n {
                break;
            }
            for _ in 0..2 {
                for r in &rows {
                    let proj: C64 = r.iter().zip(&v).map(|(a, b)| a.conj() * b).sum();
                    for (x, a) in v.iter_mut().zip(r) {
                        *x -= proj * a;
                    }
                }
            }
            let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            if norm > 1e-6 {
                rows.push(v.into_iter().map(|z| z / norm).collect());
            }
        }
        DMatrix::from_fn(n, n, |r, c| rows[r][c])
    }
}
