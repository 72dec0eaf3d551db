use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64 as C64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::hilbert::{excitation_number_operator, Basis, SparseOperator, StateVector, DENSE_LIMIT};

/// Eigenvalues of `L^dagger L` closer than this (relative to the largest
/// eigenvalue) are treated as degenerate.
pub const DEGENERACY_TOL: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EigenGroup {
    pub value: f64,
    pub multiplicity: usize,
}

#[derive(Clone, Debug)]
pub struct ClassifiedState {
    pub state: StateVector,
    /// `<v| L^dagger L |v>`
    pub rate: f64,
    /// Parent count, when `L^dagger L` conserves it.
    pub excitations: Option<usize>,
}

/// Spectral decomposition of the emission-rate operator `L^dagger L`.
///
/// Bright states span the nonzero eigenspaces, dark states the kernel. Each
/// bright state `b` whose image `L b` is dark is paired with
/// `normalize(L b)`; remaining dark directions are filled by Gram-Schmidt
/// over the basis kets in index order. Bright states whose image still emits
/// (the bosonic cascade) are listed in `cascading`.
#[derive(Clone, Debug)]
pub struct Classification {
    pub groups: Vec<EigenGroup>,
    pub bright: Vec<ClassifiedState>,
    pub dark: Vec<ClassifiedState>,
    pub pairs: Vec<(usize, usize)>,
    pub cascading: Vec<usize>,
    pub tolerance: f64,
}

impl Classification {
    pub fn max_rate(&self) -> f64 {
        self.groups.last().map_or(0.0, |g| g.value)
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        self.groups
            .iter()
            .flat_map(|g| std::iter::repeat_n(g.value, g.multiplicity))
            .collect()
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ExcitationCounts {
    pub excitations: usize,
    pub bright: usize,
    pub dark: usize,
}

struct Block {
    excitations: Option<usize>,
    indices: Vec<usize>,
    values: DVector<f64>,
    vectors: DMatrix<C64>,
}

fn commutes_with_excitations(basis: &Basis, k: &SparseOperator) -> Result<bool> {
    let ne = excitation_number_operator(basis);
    let comm = SparseOperator::commutator(k, &ne)?;
    Ok(comm.max_abs() <= 1e-12 * k.max_abs().max(1.0))
}

fn diagonalize(
    k: &SparseOperator,
    indices: Vec<usize>,
    excitations: Option<usize>,
) -> Result<Block> {
    if indices.len() >= DENSE_LIMIT {
        return Err(Error::Capacity {
            dim: indices.len() as u128,
            cap: DENSE_LIMIT - 1,
        });
    }
    let m = k.dense_block(&indices);
    let n = m.nrows();
    let eig = SymmetricEigen::try_new(m, f64::EPSILON, 1000 * n.max(1)).ok_or_else(|| {
        Error::Eigensolver(format!(
            "Hermitian eigensolver did not converge on a block of size {n}"
        ))
    })?;
    if eig.eigenvalues.iter().any(|v| !v.is_finite()) {
        return Err(Error::Eigensolver("non-finite eigenvalue".into()));
    }
    Ok(Block {
        excitations,
        indices,
        values: eig.eigenvalues,
        vectors: eig.eigenvectors,
    })
}

/// Gram-Schmidt over projected unit vectors `P e_j`, `j` ascending, where
/// `P` projects onto the span of `span`. Vectors in `seed` are kept first.
fn canonical_basis(
    span: &[DVector<C64>],
    seed: Vec<DVector<C64>>,
    target: usize,
) -> Vec<DVector<C64>> {
    let mut out = seed;
    if span.is_empty() {
        return out;
    }
    let n = span[0].len();
    for j in 0..n {
        if out.len() >= target {
            break;
        }
        let mut v = DVector::<C64>::zeros(n);
        for s in span {
            v += s * s[j].conj();
        }
        for _ in 0..2 {
            for u in &out {
                let p = u.dotc(&v);
                v -= u * p;
            }
        }
        let norm = v.norm();
        if norm > 1e-6 {
            out.push(v / C64::new(norm, 0.0));
        }
    }
    out
}

fn to_global(dim: usize, indices: &[usize], v: &DVector<C64>) -> StateVector {
    let mut amps = vec![C64::new(0.0, 0.0); dim];
    for (k, &i) in indices.iter().enumerate() {
        amps[i] = v[k];
    }
    StateVector::from_amplitudes(amps)
}

fn to_local(indices: &[usize], psi: &StateVector) -> DVector<C64> {
    DVector::from_iterator(indices.len(), indices.iter().map(|&i| psi.amplitudes()[i]))
}

/// Diagonalizes `L^dagger L` and partitions an orthonormal eigenbasis into
/// bright and dark states. When `L^dagger L` conserves the parent count the
/// problem is solved block by block.
pub fn classify_states(basis: &Basis, l: &SparseOperator) -> Result<Classification> {
    if l.dim() != basis.dim() {
        return Err(Error::DimensionMismatch {
            left: l.dim(),
            right: basis.dim(),
        });
    }
    let dim = basis.dim();
    let k = l.adjoint().matmul(l)?;
    if k.hermiticity_residual() > 1e-12 * k.max_abs().max(1.0) {
        return Err(Error::Consistency("L^dagger L is not Hermitian".into()));
    }

    let mut blocks = Vec::new();
    if commutes_with_excitations(basis, &k)? {
        for ne in 0..=basis.n_sites() {
            let indices: Vec<usize> = (0..dim)
                .filter(|&i| basis.excitations(basis.site_config(i)) == ne)
                .collect();
            blocks.push(diagonalize(&k, indices, Some(ne))?);
        }
    } else {
        blocks.push(diagonalize(&k, (0..dim).collect(), None)?);
    }

    let scale = blocks
        .iter()
        .flat_map(|b| b.values.iter().copied())
        .fold(0.0, f64::max);
    let tolerance = if scale > 0.0 {
        DEGENERACY_TOL * scale
    } else {
        1e-12
    };

    let mut all: Vec<f64> = blocks
        .iter()
        .flat_map(|b| b.values.iter().copied())
        .collect();
    all.sort_by(f64::total_cmp);
    let mut clusters: Vec<Vec<f64>> = Vec::new();
    for v in all {
        match clusters.last_mut() {
            Some(c) if v - c[c.len() - 1] <= tolerance => c.push(v),
            _ => clusters.push(vec![v]),
        }
    }
    let mut groups: Vec<EigenGroup> = clusters
        .iter()
        .map(|c| EigenGroup {
            value: c.iter().sum::<f64>() / c.len() as f64,
            multiplicity: c.len(),
        })
        .collect();
    // The kernel is reported as exactly zero.
    if let Some(g) = groups.first_mut() {
        if g.value.abs() <= tolerance {
            g.value = 0.0;
        }
    }
    let group_of = |v: f64| -> usize {
        groups
            .iter()
            .enumerate()
            .min_by(|a, b| (a.1.value - v).abs().total_cmp(&(b.1.value - v).abs()))
            .map(|(i, _)| i)
            .expect("at least one group")
    };

    let mut block_of_index = vec![0usize; dim];
    for (bi, b) in blocks.iter().enumerate() {
        for &i in &b.indices {
            block_of_index[i] = bi;
        }
    }

    let rayleigh = |psi: &StateVector| -> Result<f64> { Ok(l.apply(psi)?.norm_sqr()) };

    // Bright states: canonical basis of each nonzero eigenspace per block.
    let mut bright = Vec::new();
    let mut dark_span: Vec<Vec<DVector<C64>>> = vec![Vec::new(); blocks.len()];
    for (bi, b) in blocks.iter().enumerate() {
        let mut by_group: Vec<Vec<DVector<C64>>> = vec![Vec::new(); groups.len()];
        for (col, &v) in b.values.iter().enumerate() {
            by_group[group_of(v)].push(b.vectors.column(col).into_owned());
        }
        for (gi, span) in by_group.into_iter().enumerate() {
            if span.is_empty() {
                continue;
            }
            if groups[gi].value == 0.0 {
                dark_span[bi] = span;
                continue;
            }
            let target = span.len();
            for v in canonical_basis(&span, Vec::new(), target) {
                let state = to_global(dim, &b.indices, &v);
                let rate = rayleigh(&state)?;
                bright.push(ClassifiedState {
                    state,
                    rate,
                    excitations: b.excitations,
                });
            }
        }
    }

    // Partners normalize(L b), grouped by the block they land in.
    let mut partners: Vec<Vec<(usize, DVector<C64>)>> = vec![Vec::new(); blocks.len()];
    let mut cascading = Vec::new();
    for (i, b) in bright.iter().enumerate() {
        let image = l.apply(&b.state)?;
        let Some(image) = image.normalized() else {
            return Err(Error::Consistency(format!(
                "bright state {i} is annihilated by L"
            )));
        };
        if rayleigh(&image)? <= tolerance.max(1e-10) {
            let support = image
                .amplitudes()
                .iter()
                .position(|a| a.norm() > 1e-8)
                .expect("nonzero image");
            let bi = block_of_index[support];
            partners[bi].push((i, to_local(&blocks[bi].indices, &image)));
        } else {
            cascading.push(i);
        }
    }

    let mut dark = Vec::new();
    let mut pairs = Vec::new();
    for (bi, b) in blocks.iter().enumerate() {
        let want = dark_span[bi].len();
        let have = partners[bi].len();
        if have > want {
            return Err(Error::Consistency(format!(
                "{have} partner states exceed the {want}-dimensional dark space"
            )));
        }
        let base = dark.len();
        for (pos, (bright_idx, _)) in partners[bi].iter().enumerate() {
            pairs.push((*bright_idx, base + pos));
        }
        let seed: Vec<DVector<C64>> = partners[bi].iter().map(|(_, v)| v.clone()).collect();
        let vectors = canonical_basis(&dark_span[bi], seed, want);
        if vectors.len() != want {
            return Err(Error::Consistency(format!(
                "dark basis completion produced {} of {want} states",
                vectors.len()
            )));
        }
        for v in vectors {
            let state = to_global(dim, &b.indices, &v);
            let rate = rayleigh(&state)?;
            dark.push(ClassifiedState {
                state,
                rate,
                excitations: b.excitations,
            });
        }
    }

    pairs.sort_unstable();

    Ok(Classification {
        groups,
        bright,
        dark,
        pairs,
        cascading,
        tolerance,
    })
}

/// Bright and dark counts for each parent number `N_e = 0..=N`.
pub fn excitation_resolved_classification(
    basis: &Basis,
    l: &SparseOperator,
) -> Result<Vec<ExcitationCounts>> {
    let k = l.adjoint().matmul(l)?;
    if !commutes_with_excitations(basis, &k)? {
        return Err(Error::Consistency(
            "L^dagger L does not conserve the excitation number".into(),
        ));
    }
    let class = classify_states(basis, l)?;
    let mut rows: Vec<ExcitationCounts> = (0..=basis.n_sites())
        .map(|ne| ExcitationCounts {
            excitations: ne,
            bright: 0,
            dark: 0,
        })
        .collect();
    for s in &class.bright {
        rows[s.excitations.expect("blocked")].bright += 1;
    }
    for s in &class.dark {
        rows[s.excitations.expect("blocked")].dark += 1;
    }
    Ok(rows)
}
