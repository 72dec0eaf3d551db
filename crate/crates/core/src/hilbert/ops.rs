use num_complex::Complex64 as C64;

use super::{Basis, SparseOperator, Species};
use crate::error::{Error, Result};

fn check_site(basis: &Basis, i: usize) -> Result<()> {
    if i >= basis.n_sites() {
        return Err(Error::IndexOutOfRange {
            what: "site",
            index: i,
            len: basis.n_sites(),
        });
    }
    Ok(())
}

fn check_mode(basis: &Basis, m: usize) -> Result<()> {
    if m >= basis.n_modes() {
        if basis.n_modes() == 0 {
            return Err(Error::NoRadiationMode);
        }
        return Err(Error::IndexOutOfRange {
            what: "mode",
            index: m,
            len: basis.n_modes(),
        });
    }
    Ok(())
}

/// Emission operator of site `i`: turns the parent atom into the daughter.
///
/// For boson -> fermion this is `c_i = f_i^dagger b_i`; for fermion -> boson
/// it is the adjoint of the analogous `f^dagger b` product, i.e. the jump that
/// annihilates the fermionic parent. Whenever one of the two atoms is a
/// fermion the operator carries the Jordan-Wigner sign of the fermionic atoms
/// on sites below `i`, so distinct sites anticommute. For boson -> boson the
/// operators commute (plain spin lowering). Identity on radiation modes.
pub fn site_jump_operator(basis: &Basis, i: usize) -> Result<SparseOperator> {
    check_site(basis, i)?;
    let mode_dim = basis.mode_dim();
    let mut triplets = Vec::with_capacity(basis.dim() / 2);
    for config in 0..basis.site_dim() {
        if !Basis::is_parent(config, i) {
            continue;
        }
        let sign = if basis.fermion_parity_below(config, i) {
            -1.0
        } else {
            1.0
        };
        let target = config | (1 << i);
        for mi in 0..mode_dim {
            triplets.push((
                target * mode_dim + mi,
                config * mode_dim + mi,
                C64::new(sign, 0.0),
            ));
        }
    }
    SparseOperator::from_triplets(basis.dim(), triplets)
}

/// `n_i`: projector onto the parent atom at site `i`.
pub fn site_number_operator(basis: &Basis, i: usize) -> Result<SparseOperator> {
    check_site(basis, i)?;
    let diag: Vec<C64> = (0..basis.dim())
        .map(|idx| {
            let parent = Basis::is_parent(basis.site_config(idx), i);
            C64::new(if parent { 1.0 } else { 0.0 }, 0.0)
        })
        .collect();
    Ok(SparseOperator::diagonal(&diag))
}

/// `N_e = sum_i n_i`, the number of parent atoms.
pub fn excitation_number_operator(basis: &Basis) -> SparseOperator {
    let diag: Vec<C64> = (0..basis.dim())
        .map(|idx| C64::new(basis.excitations(basis.site_config(idx)) as f64, 0.0))
        .collect();
    SparseOperator::diagonal(&diag)
}

/// Annihilation operator of radiation mode `m`.
///
/// Fermionic modes hold at most one quantum and anticommute with every
/// fermionic site operator; bosonic modes carry the usual `sqrt(n)` factor.
pub fn mode_annihilation_operator(basis: &Basis, m: usize) -> Result<SparseOperator> {
    check_mode(basis, m)?;
    let stride = basis.mode_stride(m);
    let fermionic = basis.stats().emitted() == Species::Fermion;
    let mut triplets = Vec::with_capacity(basis.dim() / 2);
    for idx in 0..basis.dim() {
        let occ = basis.mode_occupation(idx, m);
        if occ == 0 {
            continue;
        }
        let value = if fermionic {
            if basis.fermion_parity_before_mode(idx, m) {
                -1.0
            } else {
                1.0
            }
        } else {
            (occ as f64).sqrt()
        };
        triplets.push((idx - stride, idx, C64::new(value, 0.0)));
    }
    SparseOperator::from_triplets(basis.dim(), triplets)
}

pub fn mode_number_operator(basis: &Basis, m: usize) -> Result<SparseOperator> {
    check_mode(basis, m)?;
    let diag: Vec<C64> = (0..basis.dim())
        .map(|idx| C64::new(basis.mode_occupation(idx, m) as f64, 0.0))
        .collect();
    Ok(SparseOperator::diagonal(&diag))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hilbert::{StateVector, StatisticsConfig};

    const BF: StatisticsConfig = StatisticsConfig::BOSON_FERMION;
    const FB: StatisticsConfig = StatisticsConfig::FERMION_BOSON;
    const BB: StatisticsConfig = StatisticsConfig::BOSON_BOSON;

    fn ket(dim: usize, i: usize) -> StateVector {
        StateVector::basis_state(dim, i)
    }

    #[test]
    fn single_site_lowering() {
        let b = Basis::new(1, 0, BF).unwrap();
        let c0 = site_jump_operator(&b, 0).unwrap();
        // index 0 = |e>, index 1 = |g>
        assert_eq!(c0.apply(&ket(2, 0)).unwrap(), ket(2, 1));
        assert_eq!(c0.apply(&ket(2, 1)).unwrap().norm(), 0.0);
        let twice = c0.matmul(&c0).unwrap();
        assert_eq!(twice.nnz(), 0);
    }

    #[test]
    fn number_operator_is_parent_projector() {
        let b = Basis::new(1, 0, BF).unwrap();
        let n0 = site_number_operator(&b, 0).unwrap();
        assert_eq!(n0.apply(&ket(2, 0)).unwrap(), ket(2, 0));
        assert_eq!(n0.apply(&ket(2, 1)).unwrap().norm(), 0.0);
        let c0 = site_jump_operator(&b, 0).unwrap();
        assert_eq!(c0.adjoint().matmul(&c0).unwrap(), n0);
    }

    #[test]
    fn excitation_number_spectrum_n3() {
        // Oracle: count parents in each of the 8 bitstrings.
        let b = Basis::new(3, 0, BF).unwrap();
        let ne = excitation_number_operator(&b);
        let mut counts = [0usize; 4];
        for v in ne.diagonal_values() {
            counts[v.re as usize] += 1;
        }
        assert_eq!(counts, [1, 3, 3, 1]);
        let sum = (0..3)
            .map(|i| site_number_operator(&b, i).unwrap())
            .reduce(|a, x| a.add(&x).unwrap())
            .unwrap();
        assert_eq!(sum, ne);
    }

    #[test]
    fn index_errors() {
        let b = Basis::new(2, 0, BF).unwrap();
        assert!(matches!(
            site_jump_operator(&b, 2),
            Err(Error::IndexOutOfRange {
                index: 2,
                len: 2,
                ..
            })
        ));
        assert!(site_number_operator(&b, 5).is_err());
        assert!(matches!(
            mode_annihilation_operator(&b, 0),
            Err(Error::NoRadiationMode)
        ));
    }

    fn check_fermionic_algebra(basis: &Basis) {
        let n = basis.n_sites();
        let id = SparseOperator::identity(basis.dim());
        let ops: Vec<_> = (0..n)
            .map(|i| site_jump_operator(basis, i).unwrap())
            .collect();
        for i in 0..n {
            for j in 0..n {
                let cc = SparseOperator::anticommutator(&ops[i], &ops[j]).unwrap();
                assert_eq!(cc.nnz(), 0, "{{c_{i}, c_{j}}} != 0");
                let ccd = SparseOperator::anticommutator(&ops[i], &ops[j].adjoint()).unwrap();
                if i == j {
                    assert_eq!(ccd, id, "{{c_{i}, c_{i}^dag}} != 1");
                } else {
                    assert_eq!(ccd.nnz(), 0, "{{c_{i}, c_{j}^dag}} != 0");
                }
            }
        }
    }

    #[test]
    fn fermionic_sites_anticommute_exactly() {
        for n in 1..=8 {
            check_fermionic_algebra(&Basis::new(n, 0, BF).unwrap());
            check_fermionic_algebra(&Basis::new(n, 0, FB).unwrap());
        }
        check_fermionic_algebra(&Basis::new(3, 2, BF).unwrap());
    }

    #[test]
    fn bosonic_sites_commute() {
        for n in 1..=6 {
            let b = Basis::new(n, 0, BB).unwrap();
            let ops: Vec<_> = (0..n).map(|i| site_jump_operator(&b, i).unwrap()).collect();
            for i in 0..n {
                for j in 0..n {
                    if i == j {
                        continue;
                    }
                    let c = SparseOperator::commutator(&ops[i], &ops[j]).unwrap();
                    let cd = SparseOperator::commutator(&ops[i], &ops[j].adjoint()).unwrap();
                    assert_eq!(c.nnz(), 0);
                    assert_eq!(cd.nnz(), 0);
                }
            }
        }
    }

    #[test]
    fn fermionic_mode_anticommutes_with_sites() {
        for stats in [BF, FB] {
            let b = Basis::new(3, 2, stats).unwrap();
            let id = SparseOperator::identity(b.dim());
            let modes: Vec<_> = (0..2)
                .map(|m| mode_annihilation_operator(&b, m).unwrap())
                .collect();
            for (m, nu) in modes.iter().enumerate() {
                assert_eq!(
                    SparseOperator::anticommutator(nu, &nu.adjoint()).unwrap(),
                    id
                );
                assert_eq!(
                    nu.adjoint().matmul(nu).unwrap(),
                    mode_number_operator(&b, m).unwrap()
                );
                for i in 0..3 {
                    let c = site_jump_operator(&b, i).unwrap();
                    assert_eq!(SparseOperator::anticommutator(nu, &c).unwrap().nnz(), 0);
                    assert_eq!(
                        SparseOperator::anticommutator(nu, &c.adjoint())
                            .unwrap()
                            .nnz(),
                        0
                    );
                }
            }
            assert_eq!(
                SparseOperator::anticommutator(&modes[0], &modes[1])
                    .unwrap()
                    .nnz(),
                0
            );
            assert_eq!(
                SparseOperator::anticommutator(&modes[0], &modes[1].adjoint())
                    .unwrap()
                    .nnz(),
                0
            );
        }
    }

    #[test]
    fn bosonic_mode_ladder() {
        let b = Basis::new(2, 1, BB).unwrap();
        let a = mode_annihilation_operator(&b, 0).unwrap();
        let comm = SparseOperator::commutator(&a, &a.adjoint()).unwrap();
        // [a, a^dag] = 1 except on the truncated top level.
        for idx in 0..b.dim() {
            let expect = if b.mode_occupation(idx, 0) == 2 {
                -2.0
            } else {
                1.0
            };
            assert!((comm.get(idx, idx).re - expect).abs() < 1e-12);
        }
    }
}
