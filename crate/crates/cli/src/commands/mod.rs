pub mod classify;
pub mod dynamics;
pub mod evolve;
pub mod graph;
pub mod rates;
pub mod sweep;
