//! Reputation-driven game transitions on networks.
//!
//! Agents on a square lattice or a small-world graph play a prisoner's
//! dilemma with each neighbor every Monte Carlo step. Whether a pair plays
//! the fixed low-value game or the reputation-weighted high-value game
//! depends on how both reputations compare with the population mean.
//! Cooperation raises reputation, defection lowers it, and strategies spread
//! by Fermi imitation of a fitness that mixes payoff and reputation.

pub mod config;
pub mod dynamics;
pub mod error;
pub mod experiments;
pub mod model;
pub mod network;
pub mod output;
pub mod presets;
pub mod rng;

#[cfg(feature = "cli")]
pub mod cli;

pub use error::{Error, Result};
