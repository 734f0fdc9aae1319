//! The generative-model contract consumed by every algorithm.

use alloc::vec::Vec;

use crate::rng::RngStream;

/// Outcome of one model run.
#[derive(Clone, Debug, PartialEq)]
pub enum Simulation {
    Complete(Vec<f64>),
    /// The run was cut short (e.g. a transition cap). It is charged to the
    /// budget, never accepted, and left out of scale estimates.
    Incomplete,
}

impl Simulation {
    pub fn summaries(&self) -> Option<&[f64]> {
        match self {
            Simulation::Complete(s) => Some(s),
            Simulation::Incomplete => None,
        }
    }
}

/// A simulator with a prior over its parameters.
///
/// `prior_density` must be strictly positive on everything `sample_prior`
/// can return.
pub trait SimulationModel: Sync {
    fn name(&self) -> &str;

    fn n_params(&self) -> usize;

    fn n_summaries(&self) -> usize;

    fn sample_prior(&self, rng: &mut RngStream) -> Vec<f64>;

    fn prior_density(&self, theta: &[f64]) -> f64;

    fn simulate(&self, theta: &[f64], rng: &mut RngStream) -> Simulation;
}

impl<M: SimulationModel + ?Sized> SimulationModel for &M {
    fn name(&self) -> &str {
        (**self).name()
    }

    fn n_params(&self) -> usize {
        (**self).n_params()
    }

    fn n_summaries(&self) -> usize {
        (**self).n_summaries()
    }

    fn sample_prior(&self, rng: &mut RngStream) -> Vec<f64> {
        (**self).sample_prior(rng)
    }

    fn prior_density(&self, theta: &[f64]) -> f64 {
        (**self).prior_density(theta)
    }

    fn simulate(&self, theta: &[f64], rng: &mut RngStream) -> Simulation {
        (**self).simulate(theta, rng)
    }
}
