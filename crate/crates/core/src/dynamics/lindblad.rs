use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use serde::Serialize;

use super::moments::MomentState;
use super::ode::{integrate, OdeOptions, OdeSystem};
use super::trajectory::{Trajectory, TrajectoryPoint};
use super::ModelParams;
use crate::collective::collective_operator;
use crate::error::{Error, Result};
use crate::hilbert::{mode_annihilation_operator, Basis, SparseOperator, StateVector};

const ZERO: C64 = C64::new(0.0, 0.0);

/// Shift used for the Cholesky positivity test at checkpoints.
const POSITIVITY_SHIFT: f64 = 1e-8;
/// Below this minimum eigenvalue the evolution aborts.
const POSITIVITY_ABORT: f64 = -1e-6;

#[derive(Clone, Debug, PartialEq)]
pub struct EvolveOptions {
    pub rtol: f64,
    pub atol: f64,
    /// Largest Hilbert-space dimension accepted for density-matrix runs.
    pub max_dim: usize,
    /// Checkpoint positivity tests run only up to this dimension.
    pub positivity_check_max_dim: usize,
    pub max_steps: usize,
    pub h_max: Option<f64>,
}

impl Default for EvolveOptions {
    fn default() -> Self {
        Self {
            rtol: 1e-8,
            atol: 1e-10,
            max_dim: 8192,
            positivity_check_max_dim: 256,
            max_steps: 50_000_000,
            h_max: None,
        }
    }
}

impl EvolveOptions {
    pub fn ode(&self) -> OdeOptions {
        OdeOptions {
            rtol: self.rtol,
            atol: self.atol,
            max_steps: self.max_steps,
            h_max: self.h_max,
        }
    }
}

/// Row-major complex matrix on the composite basis.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DensityMatrix {
    dim: usize,
    data: Vec<C64>,
}

impl DensityMatrix {
    pub fn from_pure(psi: &StateVector) -> Self {
        let a = psi.amplitudes();
        let dim = a.len();
        let mut data = vec![ZERO; dim * dim];
        for (r, ar) in a.iter().enumerate() {
            for (c, ac) in a.iter().enumerate() {
                data[r * dim + c] = ar * ac.conj();
            }
        }
        Self { dim, data }
    }

    pub fn from_data(dim: usize, data: Vec<C64>) -> Result<Self> {
        if data.len() != dim * dim {
            return Err(Error::DimensionMismatch {
                left: data.len(),
                right: dim * dim,
            });
        }
        Ok(Self { dim, data })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn data(&self) -> &[C64] {
        &self.data
    }

    pub fn get(&self, r: usize, c: usize) -> C64 {
        self.data[r * self.dim + c]
    }

    pub fn trace(&self) -> C64 {
        (0..self.dim).map(|i| self.data[i * self.dim + i]).sum()
    }

    pub fn hermiticity_residual(&self) -> f64 {
        hermiticity_residual(&self.data, self.dim)
    }

    /// `tr(rho O)`.
    pub fn expectation(&self, op: &SparseOperator) -> Result<C64> {
        if op.dim() != self.dim {
            return Err(Error::DimensionMismatch {
                left: op.dim(),
                right: self.dim,
            });
        }
        Ok(trace_product(&self.data, self.dim, op))
    }

    pub fn to_dmatrix(&self) -> DMatrix<C64> {
        DMatrix::from_row_slice(self.dim, self.dim, &self.data)
    }

    /// Smallest eigenvalue of the Hermitian part.
    pub fn min_eigenvalue(&self) -> Result<f64> {
        min_eigenvalue(&self.data, self.dim)
    }
}

fn hermiticity_residual(rho: &[C64], dim: usize) -> f64 {
    let mut worst = 0.0f64;
    for r in 0..dim {
        for c in r..dim {
            worst = worst.max((rho[r * dim + c] - rho[c * dim + r].conj()).norm());
        }
    }
    worst
}

fn trace_product(rho: &[C64], dim: usize, op: &SparseOperator) -> C64 {
    op.triplets().map(|(r, c, v)| v * rho[c * dim + r]).sum()
}

fn min_eigenvalue(rho: &[C64], dim: usize) -> Result<f64> {
    let m = DMatrix::from_row_slice(dim, dim, rho);
    let h = (&m + m.adjoint()) * C64::new(0.5, 0.0);
    let eig = nalgebra::SymmetricEigen::try_new(h, 1e-14, 10_000)
        .ok_or_else(|| Error::Eigensolver("Hermitian eigensolver did not converge".into()))?;
    Ok(eig
        .eigenvalues
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min))
}

/// `true` if the Hermitian part of `rho + shift I` has a Cholesky factor
/// with strictly positive real pivots.
fn cholesky_ok(rho: &[C64], dim: usize, shift: f64) -> bool {
    let mut l = vec![ZERO; dim * dim];
    for j in 0..dim {
        let mut d = rho[j * dim + j].re + shift;
        for k in 0..j {
            d -= l[j * dim + k].norm_sqr();
        }
        if d.is_nan() || d <= 0.0 {
            return false;
        }
        let pivot = d.sqrt();
        l[j * dim + j] = C64::new(pivot, 0.0);
        for i in j + 1..dim {
            let mut v = (rho[i * dim + j] + rho[j * dim + i].conj()) * 0.5;
            for k in 0..j {
                v -= l[i * dim + k] * l[j * dim + k].conj();
            }
            l[i * dim + j] = v / pivot;
        }
    }
    true
}

/// `out = A rho` for sparse `A`, dense row-major `rho`.
fn left_mul(a: &SparseOperator, rho: &[C64], dim: usize, out: &mut [C64]) {
    out.fill(ZERO);
    for r in 0..dim {
        let row_out = &mut out[r * dim..(r + 1) * dim];
        for (k, v) in a.row(r) {
            let src = &rho[k * dim..(k + 1) * dim];
            for (o, s) in row_out.iter_mut().zip(src) {
                *o += v * s;
            }
        }
    }
}

/// `out += rho B` for sparse `B`.
fn right_mul_add(rho: &[C64], b: &SparseOperator, dim: usize, out: &mut [C64]) {
    for i in 0..dim {
        let row = &rho[i * dim..(i + 1) * dim];
        let row_out = &mut out[i * dim..(i + 1) * dim];
        for (k, &x) in row.iter().enumerate() {
            if x == ZERO {
                continue;
            }
            for (c, v) in b.row(k) {
                row_out[c] += x * v;
            }
        }
    }
}

/// Reference generator `-i[H, rho] + sum_k (L rho L^dagger - {L^dagger L, rho}/2)`
/// for arbitrary (not necessarily Hermitian) `rho`.
pub fn lindblad_rhs(
    rho: &DensityMatrix,
    h: &SparseOperator,
    jumps: &[SparseOperator],
) -> Result<DensityMatrix> {
    let dim = rho.dim;
    for op in std::iter::once(h).chain(jumps) {
        if op.dim() != dim {
            return Err(Error::DimensionMismatch {
                left: op.dim(),
                right: dim,
            });
        }
    }
    let minus_i = C64::new(0.0, -1.0);
    let mut out = vec![ZERO; dim * dim];
    let mut tmp = vec![ZERO; dim * dim];
    left_mul(&h.scale(minus_i), &rho.data, dim, &mut out);
    right_mul_add(&rho.data, &h.scale(-minus_i), dim, &mut out);
    for l in jumps {
        let ld = l.adjoint();
        let k = ld.matmul(l)?.scale_real(-0.5);
        left_mul(l, &rho.data, dim, &mut tmp);
        right_mul_add(&tmp, &ld, dim, &mut out);
        left_mul(&k, &rho.data, dim, &mut tmp);
        for (o, t) in out.iter_mut().zip(&tmp) {
            *o += t;
        }
        right_mul_add(&rho.data, &k, dim, &mut out);
    }
    Ok(DensityMatrix { dim, data: out })
}

/// `g sqrt(N) (nu^dagger C + C^dagger nu)` on a basis with one cavity mode.
pub fn hamiltonian(basis: &Basis, params: &ModelParams) -> Result<SparseOperator> {
    match basis.n_modes() {
        0 => return Err(Error::NoRadiationMode),
        1 => {}
        m => {
            return Err(Error::InvalidParameter(format!(
                "the cavity Hamiltonian needs exactly one mode, basis has {m}"
            )))
        }
    }
    if params.n != basis.n_sites() {
        return Err(Error::DimensionMismatch {
            left: params.n,
            right: basis.n_sites(),
        });
    }
    let nu = mode_annihilation_operator(basis, 0)?;
    let c = collective_operator(basis)?;
    let a = nu.adjoint().matmul(&c)?;
    Ok(a.add(&a.adjoint())?.scale_real(params.g_sqrt_n()))
}

/// Operators whose expectation values make up the recorded observables.
#[derive(Clone, Debug)]
pub struct Observables {
    n_c: SparseOperator,
    n_nu: SparseOperator,
    n_bar: SparseOperator,
    s: SparseOperator,
}

impl Observables {
    pub fn new(basis: &Basis) -> Result<Self> {
        if basis.n_modes() == 0 {
            return Err(Error::NoRadiationMode);
        }
        let c = collective_operator(basis)?;
        let nu = mode_annihilation_operator(basis, 0)?;
        let n = basis.n_sites() as f64;
        let n_bar: Vec<C64> = (0..basis.dim())
            .map(|i| {
                let parents = n as usize - basis.site_config(i).count_ones() as usize;
                C64::new(parents as f64 / n, 0.0)
            })
            .collect();
        Ok(Self {
            n_c: c.adjoint().matmul(&c)?,
            n_nu: nu.adjoint().matmul(&nu)?,
            n_bar: SparseOperator::diagonal(&n_bar),
            s: nu.matmul(&c.adjoint())?,
        })
    }

    fn moments_raw(&self, rho: &[C64], dim: usize) -> MomentState {
        let s = trace_product(rho, dim, &self.s);
        MomentState {
            n_c: trace_product(rho, dim, &self.n_c).re,
            n_nu: trace_product(rho, dim, &self.n_nu).re,
            r: s.re,
            u: s.im,
            n_bar: trace_product(rho, dim, &self.n_bar).re,
        }
    }

    pub fn moments(&self, rho: &DensityMatrix) -> Result<MomentState> {
        if rho.dim != self.n_c.dim() {
            return Err(Error::DimensionMismatch {
                left: rho.dim,
                right: self.n_c.dim(),
            });
        }
        Ok(self.moments_raw(&rho.data, rho.dim))
    }
}

/// `(n_C, n_nu, Re s, Im s, n_bar)` of `rho`.
pub fn moments_of(basis: &Basis, rho: &DensityMatrix) -> Result<MomentState> {
    Observables::new(basis)?.moments(rho)
}

/// Lindblad generator split into a non-Hermitian effective Hamiltonian,
/// sandwich terms for off-diagonal jumps, and an elementwise factor for
/// per-site dephasing. Acts on Hermitian density matrices.
#[derive(Clone, Debug)]
pub struct Lindbladian {
    dim: usize,
    /// `-i H_eff` with `H_eff = H - (i/2) sum_k L_k^dagger L_k`.
    minus_i_h_eff: SparseOperator,
    jumps: Vec<(SparseOperator, SparseOperator)>,
    dephasing: f64,
    site_configs: Vec<u32>,
}

impl Lindbladian {
    /// Cavity coupling, cavity loss `sqrt(kappa) nu` and per-site dephasing
    /// `sqrt(kappa_phi) n_i`.
    pub fn new(basis: &Basis, params: &ModelParams) -> Result<Self> {
        params.validate()?;
        let h = hamiltonian(basis, params)?;
        let jumps = if params.kappa > 0.0 {
            vec![mode_annihilation_operator(basis, 0)?.scale_real(params.kappa.sqrt())]
        } else {
            Vec::new()
        };
        let mut l = Self::from_parts(&h, &jumps)?;
        l.dephasing = params.kappa_phi;
        l.site_configs = (0..basis.dim())
            .map(|i| basis.site_config(i) as u32)
            .collect();
        Ok(l)
    }

    pub fn from_parts(h: &SparseOperator, jumps: &[SparseOperator]) -> Result<Self> {
        let dim = h.dim();
        let mut k = SparseOperator::zero(dim);
        let mut pairs = Vec::new();
        for l in jumps {
            let ld = l.adjoint();
            k = k.add(&ld.matmul(l)?)?;
            pairs.push((l.clone(), ld));
        }
        let h_eff = h.sub(&k.scale(C64::new(0.0, 0.5)))?;
        Ok(Self {
            dim,
            minus_i_h_eff: h_eff.scale(C64::new(0.0, -1.0)),
            jumps: pairs,
            dephasing: 0.0,
            site_configs: vec![0; dim],
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// `out = L(rho)`; `work` is scratch of the same length.
    pub fn apply(&self, rho: &[C64], out: &mut [C64], work: &mut [C64]) {
        let dim = self.dim;
        left_mul(&self.minus_i_h_eff, rho, dim, work);
        for a in 0..dim {
            for b in a..dim {
                let y = work[a * dim + b] + work[b * dim + a].conj();
                out[a * dim + b] = y;
                out[b * dim + a] = y.conj();
            }
        }
        for (l, ld) in &self.jumps {
            left_mul(l, rho, dim, work);
            right_mul_add(work, ld, dim, out);
        }
        if self.dephasing > 0.0 {
            let half = -0.5 * self.dephasing;
            for a in 0..dim {
                let sa = self.site_configs[a];
                for b in 0..dim {
                    let flips = (sa ^ self.site_configs[b]).count_ones();
                    if flips != 0 {
                        out[a * dim + b] += rho[a * dim + b] * (half * flips as f64);
                    }
                }
            }
        }
    }
}

struct DensitySystem<'a> {
    lindbladian: &'a Lindbladian,
    work: Vec<C64>,
    nu_occupation: Vec<f64>,
    kappa: f64,
}

impl OdeSystem for DensitySystem<'_> {
    fn rhs(&mut self, _t: f64, y: &[f64], dy: &mut [f64]) {
        let dim = self.lindbladian.dim;
        let n = 2 * dim * dim;
        let rho: &[C64] = bytemuck::cast_slice(&y[..n]);
        let out: &mut [C64] = bytemuck::cast_slice_mut(&mut dy[..n]);
        self.lindbladian.apply(rho, out, &mut self.work);
        dy[n] = self.kappa
            * (0..dim)
                .map(|i| rho[i * dim + i].re * self.nu_occupation[i])
                .sum::<f64>();
    }

    fn post_step(&mut self, _t: f64, y: &mut [f64]) -> bool {
        let dim = self.lindbladian.dim;
        let n = 2 * dim * dim;
        let rho: &mut [C64] = bytemuck::cast_slice_mut(&mut y[..n]);
        let tr: f64 = (0..dim).map(|i| rho[i * dim + i].re).sum();
        if tr == 1.0 || !tr.is_finite() || tr <= 0.0 {
            return false;
        }
        let s = 1.0 / tr;
        for v in rho.iter_mut() {
            *v *= s;
        }
        true
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct CheckpointDiagnostics {
    pub checkpoints: usize,
    pub max_trace_error: f64,
    pub max_hermiticity_residual: f64,
    /// Checkpoints that received a positivity test.
    pub positivity_checks: usize,
    /// Checkpoints where `rho + 1e-8 I` was not positive definite but the
    /// smallest eigenvalue stayed above the abort threshold.
    pub positivity_warnings: usize,
    /// Smallest eigenvalue seen at a flagged checkpoint.
    pub worst_min_eigenvalue: Option<f64>,
}

#[derive(Clone, Debug)]
pub struct DensityRun {
    pub trajectory: Trajectory,
    pub diagnostics: CheckpointDiagnostics,
    pub final_state: DensityMatrix,
}

/// Integrates the master equation from `rho0` and records the moment
/// observables and the emitted count at every grid time.
pub fn evolve_density_matrix(
    basis: &Basis,
    rho0: &DensityMatrix,
    params: &ModelParams,
    t_grid: &[f64],
    opts: &EvolveOptions,
) -> Result<DensityRun> {
    let dim = basis.dim();
    if dim > opts.max_dim {
        return Err(Error::Capacity {
            dim: dim as u128,
            cap: opts.max_dim,
        });
    }
    if rho0.dim != dim {
        return Err(Error::DimensionMismatch {
            left: rho0.dim,
            right: dim,
        });
    }
    if (rho0.trace() - 1.0).norm() > 1e-10 || rho0.hermiticity_residual() > 1e-10 {
        return Err(Error::InvalidParameter(
            "initial density matrix must be Hermitian with unit trace".into(),
        ));
    }
    let lindbladian = Lindbladian::new(basis, params)?;
    let observables = Observables::new(basis)?;
    let nu_occupation: Vec<f64> = (0..dim)
        .map(|i| basis.mode_occupation(i, 0) as f64)
        .collect();
    let mut sys = DensitySystem {
        lindbladian: &lindbladian,
        work: vec![ZERO; dim * dim],
        nu_occupation,
        kappa: params.kappa,
    };
    let n = 2 * dim * dim;
    let mut y0 = Vec::with_capacity(n + 1);
    y0.extend_from_slice(bytemuck::cast_slice::<C64, f64>(&rho0.data));
    y0.push(0.0);

    let mut points = Vec::with_capacity(t_grid.len());
    let mut diag = CheckpointDiagnostics::default();
    let mut last = Vec::new();
    let stats = integrate(&mut sys, t_grid, y0, &opts.ode(), |t, y| {
        let rho: &[C64] = bytemuck::cast_slice(&y[..n]);
        let m = observables.moments_raw(rho, dim);
        points.push(TrajectoryPoint {
            t,
            n_c: m.n_c,
            n_nu: m.n_nu,
            r: m.r,
            u: m.u,
            n_bar: m.n_bar,
            emitted: y[n],
        });
        diag.checkpoints += 1;
        let tr: C64 = (0..dim).map(|i| rho[i * dim + i]).sum();
        diag.max_trace_error = diag.max_trace_error.max((tr - 1.0).norm());
        diag.max_hermiticity_residual = diag
            .max_hermiticity_residual
            .max(hermiticity_residual(rho, dim));
        if dim <= opts.positivity_check_max_dim {
            diag.positivity_checks += 1;
            if !cholesky_ok(rho, dim, POSITIVITY_SHIFT) {
                let min = min_eigenvalue(rho, dim)?;
                if min < POSITIVITY_ABORT {
                    return Err(Error::PositivityViolation {
                        t,
                        min_eigenvalue: min,
                    });
                }
                diag.positivity_warnings += 1;
                diag.worst_min_eigenvalue =
                    Some(diag.worst_min_eigenvalue.map_or(min, |w: f64| w.min(min)));
            }
        }
        if t == *t_grid.last().unwrap() {
            last = rho.to_vec();
        }
        Ok(())
    })?;
    Ok(DensityRun {
        trajectory: Trajectory::new(points, stats),
        diagnostics: diag,
        final_state: DensityMatrix { dim, data: last },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::collective::{classify_states, collective_jump};
    use crate::dynamics::{evolve_moments, linear_grid, moment_rhs_dephasing, ModelParams};
    use crate::hilbert::{all_parent_state, site_number_operator, StatisticsConfig};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn params(g: f64, n: usize, kappa: f64, kappa_phi: f64) -> ModelParams {
        ModelParams::new(g, n, kappa, kappa_phi).unwrap()
    }

    fn random_hermitian(dim: usize, rng: &mut ChaCha8Rng) -> DensityMatrix {
        let mut data = vec![ZERO; dim * dim];
        for a in 0..dim {
            for b in a..dim {
                let v = if a == b {
                    C64::new(rng.random_range(-1.0..1.0), 0.0)
                } else {
                    C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
                };
                data[a * dim + b] = v;
                data[b * dim + a] = v.conj();
            }
        }
        DensityMatrix { dim, data }
    }

    fn apply(l: &Lindbladian, rho: &DensityMatrix) -> DensityMatrix {
        let mut out = vec![ZERO; rho.dim * rho.dim];
        let mut work = out.clone();
        l.apply(&rho.data, &mut out, &mut work);
        DensityMatrix {
            dim: rho.dim,
            data: out,
        }
    }

    fn max_diff(a: &DensityMatrix, b: &DensityMatrix) -> f64 {
        a.data
            .iter()
            .zip(&b.data)
            .map(|(x, y)| (x - y).norm())
            .fold(0.0, f64::max)
    }

    #[test]
    fn trivial_generator_is_zero() {
        let rho = DensityMatrix::from_pure(&StateVector::basis_state(4, 1));
        let d = lindblad_rhs(&rho, &SparseOperator::zero(4), &[]).unwrap();
        assert!(d.data.iter().all(|v| *v == ZERO));
    }

    #[test]
    fn two_level_decay() {
        let kappa: f64 = 0.7;
        let lower =
            SparseOperator::from_triplets(2, [(1, 0, C64::new(kappa.sqrt(), 0.0))]).unwrap();
        let psi = StateVector::from_amplitudes(vec![C64::new(0.6, 0.0), C64::new(0.0, 0.8)]);
        let rho = DensityMatrix::from_pure(&psi);
        let d = lindblad_rhs(&rho, &SparseOperator::zero(2), &[lower]).unwrap();
        assert!((d.get(0, 0).re + kappa * 0.36).abs() < 1e-15);
        assert!((d.get(1, 1).re - kappa * 0.36).abs() < 1e-15);
    }

    #[test]
    fn generator_is_traceless() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for stats in StatisticsConfig::ALL {
            for n in 1..=4 {
                let b = Basis::new(n, 1, stats).unwrap();
                let p = params(0.9, n, 1.3, 0.4);
                let l = Lindbladian::new(&b, &p).unwrap();
                let rho = random_hermitian(b.dim(), &mut rng);
                assert!(apply(&l, &rho).trace().norm() < 1e-12, "{stats} N={n}");
            }
        }
    }

    #[test]
    fn fast_generator_matches_reference() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        for stats in StatisticsConfig::ALL {
            let n = 3;
            let b = Basis::new(n, 1, stats).unwrap();
            let p = params(0.8, n, 1.7, 0.6);
            let mut jumps = vec![mode_annihilation_operator(&b, 0)
                .unwrap()
                .scale_real(p.kappa.sqrt())];
            for i in 0..n {
                jumps.push(
                    site_number_operator(&b, i)
                        .unwrap()
                        .scale_real(p.kappa_phi.sqrt()),
                );
            }
            let h = hamiltonian(&b, &p).unwrap();
            let rho = random_hermitian(b.dim(), &mut rng);
            let reference = lindblad_rhs(&rho, &h, &jumps).unwrap();
            let fast = apply(&Lindbladian::new(&b, &p).unwrap(), &rho);
            assert!(max_diff(&reference, &fast) < 1e-12, "{stats}");
        }
    }

    #[test]
    fn moment_equations_are_exact_operator_identities() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        for stats in [
            StatisticsConfig::BOSON_FERMION,
            StatisticsConfig::FERMION_BOSON,
        ] {
            for n in 1..=5 {
                let b = Basis::new(n, 1, stats).unwrap();
                let p = params(0.7, n, 1.1, 0.35);
                let l = Lindbladian::new(&b, &p).unwrap();
                let obs = Observables::new(&b).unwrap();
                let rho = random_hermitian(b.dim(), &mut rng);
                let lhs = obs.moments(&apply(&l, &rho)).unwrap().to_array();
                let rhs = moment_rhs_dephasing(&obs.moments(&rho).unwrap(), &p).to_array();
                for k in 0..5 {
                    assert!((lhs[k] - rhs[k]).abs() < 1e-10, "{stats} N={n} k={k}");
                }
            }
        }
    }

    #[test]
    fn hamiltonian_structure() {
        let b = Basis::new(1, 1, StatisticsConfig::BOSON_FERMION).unwrap();
        let h = hamiltonian(&b, &params(0.3, 1, 0.0, 0.0)).unwrap();
        let e0 = b.index(0, &[0]);
        let g1 = b.index(1, &[1]);
        assert!((h.get(g1, e0).norm() - 0.3).abs() < 1e-15);
        assert_eq!(h.nnz(), 2);
        for stats in StatisticsConfig::ALL {
            for n in 1..=6 {
                let b = Basis::new(n, 1, stats).unwrap();
                let h = hamiltonian(&b, &params(1.1, n, 0.0, 0.0)).unwrap();
                assert_eq!(h.hermiticity_residual(), 0.0);
            }
        }
        let atoms = Basis::new(2, 0, StatisticsConfig::BOSON_FERMION).unwrap();
        assert!(matches!(
            hamiltonian(&atoms, &params(1.0, 2, 0.0, 0.0)),
            Err(Error::NoRadiationMode)
        ));
    }

    #[test]
    fn bright_dark_coupling_is_g_sqrt_n() {
        let n = 3;
        let atoms = Basis::new(n, 0, StatisticsConfig::BOSON_FERMION).unwrap();
        let b = Basis::new(n, 1, StatisticsConfig::BOSON_FERMION).unwrap();
        let p = params(0.4, n, 0.0, 0.0);
        let h = hamiltonian(&b, &p).unwrap();
        let c = collective_operator(&b).unwrap();
        let nu_dag = mode_annihilation_operator(&b, 0).unwrap().adjoint();
        let cls = classify_states(&atoms, &collective_jump(&atoms, 1.0).unwrap()).unwrap();
        for bright in &cls.bright {
            let mut amp = vec![ZERO; b.dim()];
            for (config, a) in bright.state.amplitudes().iter().enumerate() {
                amp[b.index(config, &[0])] = *a;
            }
            let bright0 = StateVector::from_amplitudes(amp);
            let dark1 = nu_dag.apply(&c.apply(&bright0).unwrap()).unwrap();
            assert!((dark1.norm_sqr() - 1.0).abs() < 1e-12);
            let m = bright0.inner(&h.apply(&dark1).unwrap());
            assert!((m.norm() - p.g_sqrt_n()).abs() < 1e-12);
        }
    }

    fn bright_start(b: &Basis) -> DensityMatrix {
        DensityMatrix::from_pure(&all_parent_state(b))
    }

    #[test]
    fn lossless_rabi_and_conservation() {
        let n = 3;
        let b = Basis::new(n, 1, StatisticsConfig::BOSON_FERMION).unwrap();
        let p = params(0.5, n, 0.0, 0.0);
        let period = std::f64::consts::PI / p.g_sqrt_n();
        let grid = linear_grid(10.0 * period, 201).unwrap();
        let opts = EvolveOptions {
            rtol: 1e-10,
            atol: 1e-12,
            ..Default::default()
        };
        let run = evolve_density_matrix(&b, &bright_start(&b), &p, &grid, &opts).unwrap();
        for pt in run.trajectory.points() {
            assert!((pt.n_c - (p.g_sqrt_n() * pt.t).cos().powi(2)).abs() < 1e-7);
            assert!((pt.n_c + pt.n_nu - 1.0).abs() < 1e-9);
        }
        let d = &run.diagnostics;
        assert_eq!(d.positivity_checks, 201);
        assert_eq!(d.positivity_warnings, 0);
        assert!(d.max_trace_error < 1e-10 && d.max_hermiticity_residual < 1e-10);
    }

    #[test]
    fn density_matrix_matches_moments() {
        for stats in [
            StatisticsConfig::BOSON_FERMION,
            StatisticsConfig::FERMION_BOSON,
        ] {
            let n = 3;
            let b = Basis::new(n, 1, stats).unwrap();
            let p = params(1.0, n, 1.2, 0.3);
            let grid = linear_grid(8.0, 81).unwrap();
            let opts = EvolveOptions::default();
            let rho0 = bright_start(&b);
            let m0 = moments_of(&b, &rho0).unwrap();
            let expected = MomentState::all_parent().to_array();
            for (a, e) in m0.to_array().iter().zip(expected) {
                assert!((a - e).abs() < 1e-14);
            }
            let full = evolve_density_matrix(&b, &rho0, &p, &grid, &opts).unwrap();
            let mom = evolve_moments(m0, &p, &grid, &opts).unwrap();
            for (a, m) in full.trajectory.points().iter().zip(mom.points()) {
                for (x, y) in [
                    (a.n_c, m.n_c),
                    (a.n_nu, m.n_nu),
                    (a.n_bar, m.n_bar),
                    (a.u, m.u),
                    (a.emitted, m.emitted),
                ] {
                    assert!((x - y).abs() < 10.0 * opts.rtol, "{stats} t={}", a.t);
                }
            }
        }
    }

    #[test]
    fn one_quantum_without_dephasing() {
        let n = 2;
        let b = Basis::new(n, 1, StatisticsConfig::BOSON_FERMION).unwrap();
        let p = params(0.5, n, 2.0, 0.0);
        let t = 40.0 / (n as f64 * p.gamma0().unwrap());
        let run = evolve_density_matrix(
            &b,
            &bright_start(&b),
            &p,
            &linear_grid(t, 21).unwrap(),
            &EvolveOptions::default(),
        )
        .unwrap();
        let e: Vec<f64> = run
            .trajectory
            .points()
            .iter()
            .map(|pt| pt.emitted)
            .collect();
        // Once the cavity is empty the count only moves at the absolute
        // tolerance.
        assert!(e.windows(2).all(|w| w[1] >= w[0] - 1e-9));
        assert!((e.last().unwrap() - 1.0).abs() < 1e-6);
    }

    #[test]
    fn bosonic_emission_grows_monotonically_at_first() {
        let n = 3;
        let b = Basis::new(n, 1, StatisticsConfig::BOSON_BOSON).unwrap();
        let p = params(0.5, n, 0.0, 0.0);
        let grid = linear_grid(0.5 / p.g_sqrt_n(), 21).unwrap();
        let run =
            evolve_density_matrix(&b, &bright_start(&b), &p, &grid, &EvolveOptions::default())
                .unwrap();
        let nu: Vec<f64> = run.trajectory.points().iter().map(|pt| pt.n_nu).collect();
        assert!(nu.windows(2).all(|w| w[1] > w[0]));
    }

    #[test]
    fn capacity_and_input_checks() {
        let b = Basis::new(4, 1, StatisticsConfig::BOSON_FERMION).unwrap();
        let p = params(1.0, 4, 1.0, 0.0);
        let opts = EvolveOptions {
            max_dim: 16,
            ..Default::default()
        };
        let r = evolve_density_matrix(&b, &bright_start(&b), &p, &[0.0, 1.0], &opts);
        assert!(matches!(r, Err(Error::Capacity { .. })));
        let bad = DensityMatrix::from_data(b.dim(), vec![ZERO; b.dim() * b.dim()]).unwrap();
        assert!(
            evolve_density_matrix(&b, &bad, &p, &[0.0, 1.0], &EvolveOptions::default()).is_err()
        );
    }

    #[test]
    fn min_eigenvalue_of_pure_state() {
        let rho = DensityMatrix::from_pure(&StateVector::basis_state(3, 2));
        assert!(rho.min_eigenvalue().unwrap().abs() < 1e-14);
        assert!(cholesky_ok(&rho.data, 3, POSITIVITY_SHIFT));
        let mut data = rho.data.clone();
        data[0] = C64::new(-1e-3, 0.0);
        assert!(!cholesky_ok(&data, 3, POSITIVITY_SHIFT));
    }
}
