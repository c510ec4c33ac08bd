//! Simulation library for non-stationary latent bandits.

pub mod agents;
pub mod domain;
pub mod envs;
pub mod error;
pub mod inference;
pub mod metrics;
pub mod offline;
pub mod runner;
pub mod sampling;

pub use error::{Error, Result};
