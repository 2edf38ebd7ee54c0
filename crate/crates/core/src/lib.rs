//! Simulation and closed-form analysis of federated edge learning over a
//! broadband multi-access channel, comparing over-the-air analog aggregation
//! with an OFDMA digital baseline.

pub mod analytics;
pub mod network;
pub mod phy;
pub mod learning;
pub mod extensions;
pub mod experiment;
pub mod error;
pub mod rng;

pub use error::{Error, Result};
