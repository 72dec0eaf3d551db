//! Exact simulation of collective spontaneous emission by `N` localized
//! two-level emitters when the emitted quantum is a fermion, with the
//! photonic (bosonic) Dicke model as a reference.
//!
//! * [`hilbert`]: basis, site operators with the right exchange signs, states.
//! * [`collective`]: collective jump and mode operators, bright/dark
//!   classification and multi-mode sector graphs.
//! * [`analytics`]: closed-form emission rates and correlations.
//! * [`dynamics`]: Lindblad and moment-equation time evolution.

pub mod analytics;
pub mod collective;
pub mod dynamics;
mod error;
pub mod hilbert;

pub use error::{Error, Result};
pub use num_complex::Complex64;
