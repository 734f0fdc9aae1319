//! Adaptive-distance ABC population Monte Carlo.
//!
//! The core is `no_std` (with `alloc`); file formats, the experiment runner
//! and threaded execution live in the `adaptive-abc` crate.

#![no_std]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod algorithms;
pub mod diagnostics;
pub mod distance;
pub mod error;
pub mod linalg;
pub mod model;
pub mod models;
pub mod population;
pub mod rng;
#[cfg(feature = "serde")]
pub mod serde_f64;
pub mod stats;

pub use algorithms::{
    abc_importance, abc_pmc, abc_pmc_adapt_curr, abc_pmc_adapt_prev, abc_rejection, Algorithm,
    Executor, IterationRecord, RunConfig, RunRecord, Sequential, Termination,
};
pub use distance::{accept, DistanceFunction, NestedAcceptanceRule, Stage};
pub use error::{Error, Result};
pub use model::{Simulation, SimulationModel};
pub use population::{ImportanceDensity, Particle, ParticlePopulation};
pub use rng::RngStream;
