use alloc::vec::Vec;

use crate::error::{check_dim, Error, Result};
use crate::model::{Simulation, SimulationModel};
use crate::rng::RngStream;

/// Attempts before giving up on a model that keeps returning incomplete runs.
const MAX_ATTEMPTS: u64 = 10_000;

/// A simulated observation with the parameters and seed that produced it.
#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ObservedDataset {
    pub summaries: Vec<f64>,
    pub truth: Vec<f64>,
    pub seed: u64,
    /// Incomplete simulations discarded before this one.
    pub retries: u64,
}

/// Simulates one dataset at `truth`, or at a prior draw when `truth` is
/// `None`. Incomplete simulations are retried on the next substream.
pub fn make_observed_dataset<M: SimulationModel + ?Sized>(
    model: &M,
    truth: Option<&[f64]>,
    seed: u64,
) -> Result<ObservedDataset> {
    let root = RngStream::new(seed);
    let truth: Vec<f64> = match truth {
        Some(t) => {
            check_dim("truth", model.n_params(), t.len())?;
            if !(model.prior_density(t) > 0.0) {
                return Err(Error::InvalidArgument("truth lies outside the prior support".into()));
            }
            t.to_vec()
        }
        None => model.sample_prior(&mut root.fork(0)),
    };
    for attempt in 0..MAX_ATTEMPTS {
        if let Simulation::Complete(summaries) = model.simulate(&truth, &mut root.fork(1 + attempt)) {
            return Ok(ObservedDataset {
                summaries,
                truth,
                seed,
                retries: attempt,
            });
        }
        log::info!("observed dataset: attempt {attempt} hit the transition cap; retrying");
    }
    Err(Error::NoCompleteSimulation(MAX_ATTEMPTS))
}
