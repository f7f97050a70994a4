//! Randomized quasi-Monte Carlo on scrambled base-2 digital nets, with a
//! median-of-means estimator and exact checks of the underlying algebra.

pub mod cli;
pub mod error;
pub mod estimator;
pub mod gf2;
pub mod integrands;
pub mod netgen;
pub mod partitions;
pub mod walsh;

pub use error::{Error, Result};
