use nalgebra::DMatrix;
use num_complex::Complex64 as C64;

use super::StateVector;
use crate::error::{Error, Result};

/// Operators are only materialized as dense matrices below this dimension.
pub const DENSE_LIMIT: usize = 4096;

/// Square complex matrix in compressed-row form.
///
/// Entries are sorted by column within each row, duplicates are summed at
/// construction and exact zeros are dropped, so two operators compare equal
/// exactly when their matrices do.
#[derive(Clone, Debug, PartialEq)]
pub struct SparseOperator {
    dim: usize,
    row_ptr: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<C64>,
}

impl SparseOperator {
    pub fn from_triplets<I>(dim: usize, triplets: I) -> Result<Self>
    where
        I: IntoIterator<Item = (usize, usize, C64)>,
    {
        let mut entries: Vec<(usize, usize, C64)> = triplets.into_iter().collect();
        for &(r, c, _) in &entries {
            if r >= dim || c >= dim {
                return Err(Error::IndexOutOfRange {
                    what: "matrix",
                    index: r.max(c),
                    len: dim,
                });
            }
        }
        entries.sort_by_key(|&(r, c, _)| (r, c));

        let mut row_ptr = vec![0usize; dim + 1];
        let mut cols = Vec::with_capacity(entries.len());
        let mut vals = Vec::with_capacity(entries.len());
        let mut rows = Vec::with_capacity(entries.len());
        let mut iter = entries.into_iter().peekable();
        while let Some((r, c, mut v)) = iter.next() {
            while let Some(&(r2, c2, v2)) = iter.peek() {
                if r2 == r && c2 == c {
                    v += v2;
                    iter.next();
                } else {
                    break;
                }
            }
            if v != C64::new(0.0, 0.0) {
                rows.push(r);
                cols.push(c);
                vals.push(v);
            }
        }
        for &r in &rows {
            row_ptr[r + 1] += 1;
        }
        for r in 0..dim {
            row_ptr[r + 1] += row_ptr[r];
        }
        Ok(Self {
            dim,
            row_ptr,
            cols,
            vals,
        })
    }

    pub fn zero(dim: usize) -> Self {
        Self {
            dim,
            row_ptr: vec![0; dim + 1],
            cols: Vec::new(),
            vals: Vec::new(),
        }
    }

    pub fn identity(dim: usize) -> Self {
        Self::diagonal(&vec![C64::new(1.0, 0.0); dim])
    }

    pub fn diagonal(values: &[C64]) -> Self {
        Self::from_triplets(
            values.len(),
            values.iter().enumerate().map(|(i, &v)| (i, i, v)),
        )
        .expect("diagonal indices are in range")
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn nnz(&self) -> usize {
        self.vals.len()
    }

    /// Nonzero entries of row `r` as `(column, value)`.
    pub fn row(&self, r: usize) -> impl Iterator<Item = (usize, C64)> + '_ {
        let span = self.row_ptr[r]..self.row_ptr[r + 1];
        self.cols[span.clone()]
            .iter()
            .copied()
            .zip(self.vals[span].iter().copied())
    }

    pub fn triplets(&self) -> impl Iterator<Item = (usize, usize, C64)> + '_ {
        (0..self.dim).flat_map(move |r| self.row(r).map(move |(c, v)| (r, c, v)))
    }

    pub fn get(&self, r: usize, c: usize) -> C64 {
        let span = self.row_ptr[r]..self.row_ptr[r + 1];
        match self.cols[span.clone()].binary_search(&c) {
            Ok(k) => self.vals[span.start + k],
            Err(_) => C64::new(0.0, 0.0),
        }
    }

    pub fn adjoint(&self) -> Self {
        Self::from_triplets(self.dim, self.triplets().map(|(r, c, v)| (c, r, v.conj())))
            .expect("transpose stays in range")
    }

    pub fn scale(&self, s: C64) -> Self {
        Self::from_triplets(self.dim, self.triplets().map(|(r, c, v)| (r, c, v * s)))
            .expect("scaling keeps indices")
    }

    pub fn scale_real(&self, s: f64) -> Self {
        self.scale(C64::new(s, 0.0))
    }

    fn check_dim(&self, other: usize) -> Result<()> {
        if self.dim != other {
            return Err(Error::DimensionMismatch {
                left: self.dim,
                right: other,
            });
        }
        Ok(())
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_dim(other.dim)?;
        Self::from_triplets(self.dim, self.triplets().chain(other.triplets()))
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.check_dim(other.dim)?;
        Self::from_triplets(
            self.dim,
            self.triplets()
                .chain(other.triplets().map(|(r, c, v)| (r, c, -v))),
        )
    }

    /// Sparse product `self * other`.
    pub fn matmul(&self, other: &Self) -> Result<Self> {
        self.check_dim(other.dim)?;
        let mut acc = vec![C64::new(0.0, 0.0); self.dim];
        let mut touched = vec![false; self.dim];
        let mut row_cols = Vec::new();
        let mut triplets = Vec::new();
        for r in 0..self.dim {
            for (k, a) in self.row(r) {
                for (c, b) in other.row(k) {
                    if !touched[c] {
                        touched[c] = true;
                        row_cols.push(c);
                    }
                    acc[c] += a * b;
                }
            }
            row_cols.sort_unstable();
            for &c in &row_cols {
                triplets.push((r, c, acc[c]));
                acc[c] = C64::new(0.0, 0.0);
                touched[c] = false;
            }
            row_cols.clear();
        }
        Self::from_triplets(self.dim, triplets)
    }

    /// `{a, b} = ab + ba`
    pub fn anticommutator(a: &Self, b: &Self) -> Result<Self> {
        a.matmul(b)?.add(&b.matmul(a)?)
    }

    /// `[a, b] = ab - ba`
    pub fn commutator(a: &Self, b: &Self) -> Result<Self> {
        a.matmul(b)?.sub(&b.matmul(a)?)
    }

    pub fn apply(&self, psi: &StateVector) -> Result<StateVector> {
        self.check_dim(psi.dim())?;
        let mut out = vec![C64::new(0.0, 0.0); self.dim];
        self.apply_into(psi.amplitudes(), &mut out);
        Ok(StateVector::from_amplitudes(out))
    }

    /// `out = self * x` for raw slices of matching length.
    pub fn apply_into(&self, x: &[C64], out: &mut [C64]) {
        debug_assert_eq!(x.len(), self.dim);
        debug_assert_eq!(out.len(), self.dim);
        for (r, o) in out.iter_mut().enumerate() {
            *o = self.row(r).map(|(c, v)| v * x[c]).sum();
        }
    }

    /// `<psi| self |psi>`
    pub fn expectation(&self, psi: &StateVector) -> Result<C64> {
        let phi = self.apply(psi)?;
        Ok(psi.inner(&phi))
    }

    /// Largest entry magnitude; 0 for the zero operator.
    pub fn max_abs(&self) -> f64 {
        self.vals.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    pub fn is_diagonal(&self) -> bool {
        self.triplets().all(|(r, c, _)| r == c)
    }

    pub fn diagonal_values(&self) -> Vec<C64> {
        (0..self.dim).map(|i| self.get(i, i)).collect()
    }

    /// Largest `|A - A^dagger|` entry.
    pub fn hermiticity_residual(&self) -> f64 {
        self.sub(&self.adjoint()).expect("same dimension").max_abs()
    }

    pub fn to_dense(&self) -> Result<DMatrix<C64>> {
        if self.dim >= DENSE_LIMIT {
            return Err(Error::Capacity {
                dim: self.dim as u128,
                cap: DENSE_LIMIT - 1,
            });
        }
        let mut m = DMatrix::zeros(self.dim, self.dim);
        for (r, c, v) in self.triplets() {
            m[(r, c)] = v;
        }
        Ok(m)
    }

    /// Principal submatrix on the given (sorted or unsorted) index set.
    pub(crate) fn dense_block(&self, indices: &[usize]) -> DMatrix<C64> {
        let mut pos = vec![usize::MAX; self.dim];
        for (k, &i) in indices.iter().enumerate() {
            pos[i] = k;
        }
        let mut m = DMatrix::zeros(indices.len(), indices.len());
        for (k, &r) in indices.iter().enumerate() {
            for (c, v) in self.row(r) {
                if pos[c] != usize::MAX {
                    m[(k, pos[c])] = v;
                }
            }
        }
        m
    }
}
