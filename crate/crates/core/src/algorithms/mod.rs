//! Rejection, importance sampling and the population Monte Carlo family.
//!
//! All population algorithms share one contract: every call to
//! [`SimulationModel::simulate`] is charged to `RunConfig::budget`, and a run
//! stops as soon as a further simulation would be needed beyond it. Partial
//! final iterations are discarded.
//!
//! Simulation `j` of iteration `t` draws from the substream
//! `RngStream::new(seed).fork(t).fork(j)`, so results do not depend on how an
//! [`Executor`] batches or parallelises the work.

mod engine;
mod executor;
mod record;

pub mod adapt_curr;
pub mod adapt_prev;
pub mod importance;
pub mod pmc;
pub mod rejection;

pub use adapt_curr::{abc_pmc_adapt_curr, adapt_curr_population_target, first_iteration_tuning};
pub use adapt_prev::{abc_pmc_adapt_prev, AdaptPrevOptions};
pub use executor::{Executor, Sequential};
pub use importance::abc_importance;
pub use pmc::{abc_pmc, InitialDistance, PmcOptions};
pub use record::{Algorithm, IterationRecord, RunConfig, RunRecord, Termination, DEFAULT_SCALE_STORE_CAP};
pub use rejection::{abc_rejection, RejectionDistance, RejectionOutput, RejectionThreshold};
