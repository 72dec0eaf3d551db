//! Composite Hilbert space of `N` two-level sites (one atom per site) and a
//! handful of radiation modes, with the site-local algebra that the rest of
//! the crate builds on.
//!
//! Fermionic sign convention: operators carry a Jordan-Wigner string over
//! all fermionic occupations at lower site index. Radiation modes are ordered
//! after every site, so a fermionic mode operator carries the parity of the
//! whole atomic register plus the modes before it. Basis kets are the
//! ascending-site products of creation operators acting on the vacuum.

mod basis;
mod operator;
mod ops;
mod state;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use basis::Basis;
pub use operator::{SparseOperator, DENSE_LIMIT};
pub use ops::{
    excitation_number_operator, mode_annihilation_operator, mode_number_operator,
    site_jump_operator, site_number_operator,
};
pub use state::{all_daughter_state, all_parent_state, product_superposition_state, StateVector};

/// Quantum statistics of a particle species.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Species {
    Boson,
    Fermion,
}

/// Statistics of parent atom, daughter atom and the emitted quantum.
///
/// Only three combinations exist: boson -> fermion and fermion -> boson (both
/// emit a fermion), and boson -> boson (emits a boson, the photonic reference).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct StatisticsConfig {
    parent: Species,
    daughter: Species,
}

impl StatisticsConfig {
    pub const BOSON_FERMION: Self = Self {
        parent: Species::Boson,
        daughter: Species::Fermion,
    };
    pub const FERMION_BOSON: Self = Self {
        parent: Species::Fermion,
        daughter: Species::Boson,
    };
    pub const BOSON_BOSON: Self = Self {
        parent: Species::Boson,
        daughter: Species::Boson,
    };

    pub const ALL: [Self; 3] = [Self::BOSON_FERMION, Self::FERMION_BOSON, Self::BOSON_BOSON];

    pub fn new(parent: Species, daughter: Species) -> Result<Self> {
        match (parent, daughter) {
            (Species::Fermion, Species::Fermion) => Err(Error::InvalidStatistics(
                "fermion -> fermion decay is not modeled".into(),
            )),
            _ => Ok(Self { parent, daughter }),
        }
    }

    pub fn parent(&self) -> Species {
        self.parent
    }

    pub fn daughter(&self) -> Species {
        self.daughter
    }

    /// The emitted quantum is a fermion exactly when parent and daughter differ.
    pub fn emitted(&self) -> Species {
        if self.parent != self.daughter {
            Species::Fermion
        } else {
            Species::Boson
        }
    }

    pub fn emits_fermion(&self) -> bool {
        self.emitted() == Species::Fermion
    }

    /// Short tag used on the command line: `bf`, `fb` or `bb`.
    pub fn tag(&self) -> &'static str {
        match (self.parent, self.daughter) {
            (Species::Boson, Species::Fermion) => "bf",
            (Species::Fermion, Species::Boson) => "fb",
            _ => "bb",
        }
    }

    /// Whether the atom occupying a site with the given state is a fermion.
    pub(crate) fn site_is_fermion(&self, parent_present: bool) -> bool {
        let species = if parent_present {
            self.parent
        } else {
            self.daughter
        };
        species == Species::Fermion
    }
}

impl Default for StatisticsConfig {
    fn default() -> Self {
        Self::BOSON_FERMION
    }
}

impl fmt::Display for StatisticsConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

impl FromStr for StatisticsConfig {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "bf" | "boson-fermion" => Ok(Self::BOSON_FERMION),
            "fb" | "fermion-boson" => Ok(Self::FERMION_BOSON),
            "bb" | "boson-boson" => Ok(Self::BOSON_BOSON),
            other => Err(Error::InvalidStatistics(format!(
                "unknown statistics tag {other:?} (expected bf, fb or bb)"
            ))),
        }
    }
}

impl TryFrom<String> for StatisticsConfig {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<StatisticsConfig> for String {
    fn from(s: StatisticsConfig) -> String {
        s.tag().to_string()
    }
}
