use fermidicke::collective::{
    expected_rate_multiset, multimode_sector_graph, sector_rate_spectrum, CollectiveModeSet,
};
use fermidicke::hilbert::{Basis, StatisticsConfig};
use fermidicke::Complex64;
use nalgebra::DMatrix;
use proptest::prelude::*;

#[test]
fn every_mode_count_gives_hypercubes() {
    for stats in [
        StatisticsConfig::BOSON_FERMION,
        StatisticsConfig::FERMION_BOSON,
    ] {
        for n in 1..=6 {
            let b = Basis::new(n, 0, stats).unwrap();
            for m in 1..=n {
                let modes = CollectiveModeSet::dft_uniform(n, m, 1.0 / m as f64).unwrap();
                let g = multimode_sector_graph(&b, &modes).unwrap();
                assert_eq!(g.sectors().len(), 1 << (n - m));
                assert!(g.is_hypercube(), "{stats} N={n} M={m}");
                for s in 0..g.sectors().len() {
                    assert_eq!(g.sector_diameter(s), m);
                }
                let top = g.nodes().iter().map(|x| x.rate).fold(0.0, f64::max);
                assert!((top - n as f64).abs() < 1e-12);
            }
        }
    }
}

fn random_orthonormal_rows(n: usize, m: usize, entries: &[f64]) -> DMatrix<Complex64> {
    let a = DMatrix::from_fn(n, n, |i, j| {
        Complex64::new(entries[2 * (i * n + j)], entries[2 * (i * n + j) + 1])
    });
    let q = a.qr().q();
    DMatrix::from_fn(m, n, |i, j| q[(j, i)].conj())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn arbitrary_orthonormal_modes(
        entries in prop::collection::vec(-1.0f64..1.0, 2 * 16),
        rates in prop::collection::vec(0.0f64..2.0, 2),
    ) {
        let (n, m) = (4, 2);
        let w = random_orthonormal_rows(n, m, &entries);
        let modes = CollectiveModeSet::new(w, rates).unwrap();
        let b = Basis::new(n, 0, StatisticsConfig::BOSON_FERMION).unwrap();
        let g = multimode_sector_graph(&b, &modes).unwrap();
        prop_assert!(g.is_hypercube());
        let expected = expected_rate_multiset(n, &modes);
        for rates in sector_rate_spectrum(&g) {
            for (a, e) in rates.iter().zip(&expected) {
                prop_assert!((a - e).abs() < 1e-12);
            }
        }
    }
}

#[test]
fn non_orthonormal_weights_rejected() {
    let w = DMatrix::from_element(2, 3, Complex64::new(0.5, 0.0));
    assert!(CollectiveModeSet::new(w, vec![1.0, 1.0]).is_err());
}
