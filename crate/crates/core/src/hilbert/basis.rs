use serde::Serialize;

use super::{Species, StatisticsConfig};
use crate::error::{Error, Result};

/// Enumeration of the composite space: `N` sites, each holding exactly one
/// atom, followed by `M` radiation modes.
///
/// A basis index is `config * mode_dim + mode_index`. In `config` bit `i` is
/// set when site `i` holds the daughter atom, so index 0 is the all-parent
/// state with every mode empty. Mode occupations are ordered
/// lexicographically with mode 0 most significant.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Basis {
    n_sites: usize,
    stats: StatisticsConfig,
    capacities: Vec<usize>,
    strides: Vec<usize>,
    mode_dim: usize,
    dim: usize,
}

impl Basis {
    pub const MAX_SITES: usize = 16;
    pub const DEFAULT_CAP: usize = 1 << 22;

    pub fn new(n_sites: usize, n_modes: usize, stats: StatisticsConfig) -> Result<Self> {
        Self::with_cap(n_sites, n_modes, stats, Self::DEFAULT_CAP)
    }

    pub fn with_cap(
        n_sites: usize,
        n_modes: usize,
        stats: StatisticsConfig,
        cap: usize,
    ) -> Result<Self> {
        if n_sites == 0 || n_sites > Self::MAX_SITES {
            return Err(Error::InvalidParameter(format!(
                "site count must be in 1..={}, got {n_sites}",
                Self::MAX_SITES
            )));
        }
        if n_modes > n_sites {
            return Err(Error::InvalidParameter(format!(
                "mode count {n_modes} exceeds site count {n_sites}"
            )));
        }
        // A bosonic mode never holds more quanta than there are emitters.
        let capacity = match stats.emitted() {
            Species::Fermion => 1,
            Species::Boson => n_sites,
        };
        let capacities = vec![capacity; n_modes];

        let mut dim: u128 = 1u128 << n_sites;
        for &c in &capacities {
            dim = dim.saturating_mul(c as u128 + 1);
        }
        if dim > cap as u128 {
            return Err(Error::Capacity { dim, cap });
        }

        let mut strides = vec![1usize; n_modes];
        for m in (0..n_modes.saturating_sub(1)).rev() {
            strides[m] = strides[m + 1] * (capacities[m + 1] + 1);
        }
        let mode_dim = capacities.iter().map(|c| c + 1).product();

        Ok(Self {
            n_sites,
            stats,
            capacities,
            strides,
            mode_dim,
            dim: dim as usize,
        })
    }

    /// The same sites and statistics with every radiation mode removed.
    pub fn atoms_only(&self) -> Self {
        Self::new(self.n_sites, 0, self.stats).expect("atomic register always fits")
    }

    pub fn n_sites(&self) -> usize {
        self.n_sites
    }

    pub fn n_modes(&self) -> usize {
        self.capacities.len()
    }

    pub fn stats(&self) -> StatisticsConfig {
        self.stats
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn site_dim(&self) -> usize {
        1 << self.n_sites
    }

    pub fn mode_dim(&self) -> usize {
        self.mode_dim
    }

    pub fn mode_capacity(&self, m: usize) -> usize {
        self.capacities[m]
    }

    pub fn index(&self, config: usize, modes: &[usize]) -> usize {
        debug_assert!(config < self.site_dim());
        debug_assert_eq!(modes.len(), self.n_modes());
        let mode_index: usize = modes
            .iter()
            .zip(&self.strides)
            .map(|(occ, stride)| occ * stride)
            .sum();
        config * self.mode_dim + mode_index
    }

    pub fn site_config(&self, index: usize) -> usize {
        index / self.mode_dim
    }

    pub fn mode_occupation(&self, index: usize, m: usize) -> usize {
        (index % self.mode_dim) / self.strides[m] % (self.capacities[m] + 1)
    }

    pub(crate) fn mode_stride(&self, m: usize) -> usize {
        self.strides[m]
    }

    pub fn is_parent(config: usize, site: usize) -> bool {
        config & (1 << site) == 0
    }

    /// Number of parent atoms (the excitation number) in a site configuration.
    pub fn excitations(&self, config: usize) -> usize {
        self.n_sites - config.count_ones() as usize
    }

    /// Parity of the fermionic atoms on sites `0..site`.
    pub(crate) fn fermion_parity_below(&self, config: usize, site: usize) -> bool {
        let mut odd = false;
        for j in 0..site {
            if self.stats.site_is_fermion(Self::is_parent(config, j)) {
                odd = !odd;
            }
        }
        odd
    }

    /// Parity of every fermionic occupation ordered before mode `m`.
    pub(crate) fn fermion_parity_before_mode(&self, index: usize, m: usize) -> bool {
        let config = self.site_config(index);
        let mut odd = self.fermion_parity_below(config, self.n_sites);
        if self.stats.emits_fermion() {
            for mm in 0..m {
                if self.mode_occupation(index, mm) % 2 == 1 {
                    odd = !odd;
                }
            }
        }
        odd
    }

    /// Human-readable ket label: `e`/`g` per site (site 0 first), then the
    /// mode occupations after a `|`.
    pub fn label(&self, index: usize) -> String {
        let config = self.site_config(index);
        let mut s: String = (0..self.n_sites)
            .map(|i| if Self::is_parent(config, i) { 'e' } else { 'g' })
            .collect();
        if self.n_modes() > 0 {
            s.push('|');
            for m in 0..self.n_modes() {
                if m > 0 {
                    s.push(',');
                }
                s.push_str(&self.mode_occupation(index, m).to_string());
            }
        }
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dimensions() {
        let bf = StatisticsConfig::BOSON_FERMION;
        assert_eq!(Basis::new(1, 1, bf).unwrap().dim(), 4);
        assert_eq!(Basis::new(3, 1, bf).unwrap().dim(), 16);
        for s in StatisticsConfig::ALL {
            let b = Basis::new(4, 0, s).unwrap();
            assert_eq!(b.dim(), 16);
            assert_eq!(b.n_modes(), 0);
        }
        // Fermionic modes hold one quantum: 2^N * 2^M.
        assert_eq!(Basis::new(5, 3, bf).unwrap().dim(), 1 << 8);
        // A bosonic mode holds up to N quanta.
        assert_eq!(
            Basis::new(3, 1, StatisticsConfig::BOSON_BOSON)
                .unwrap()
                .dim(),
            8 * 4
        );
    }

    #[test]
    fn rejects_bad_sizes() {
        let bf = StatisticsConfig::BOSON_FERMION;
        assert!(Basis::new(0, 0, bf).is_err());
        assert!(Basis::new(17, 0, bf).is_err());
        assert!(Basis::new(2, 3, bf).is_err());
        assert!(matches!(
            Basis::with_cap(10, 4, bf, 1000),
            Err(Error::Capacity {
                dim: 16384,
                cap: 1000
            })
        ));
        assert!(matches!(
            Basis::new(16, 16, bf),
            Err(Error::Capacity { .. })
        ));
    }

    #[test]
    fn index_round_trip() {
        let b = Basis::new(3, 2, StatisticsConfig::BOSON_FERMION).unwrap();
        for idx in 0..b.dim() {
            let config = b.site_config(idx);
            let modes: Vec<usize> = (0..2).map(|m| b.mode_occupation(idx, m)).collect();
            assert_eq!(b.index(config, &modes), idx);
        }
        assert_eq!(b.label(0), "eee|0,0");
        assert_eq!(b.label(b.index(0b101, &[0, 1])), "geg|0,1");
    }

    #[test]
    fn construction_is_deterministic() {
        let a = Basis::new(6, 2, StatisticsConfig::FERMION_BOSON).unwrap();
        let b = Basis::new(6, 2, StatisticsConfig::FERMION_BOSON).unwrap();
        assert_eq!(a, b);
    }
}
