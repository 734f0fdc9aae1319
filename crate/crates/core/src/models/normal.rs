use alloc::vec;
use alloc::vec::Vec;

use rand_distr::{Distribution, StandardNormal};

use crate::model::{Simulation, SimulationModel};
use crate::rng::RngStream;

/// `theta ~ N(0, prior_sd^2)`, `s1 ~ N(theta, s1_sd^2)`, `s2 ~ N(0, s2_sd^2)`:
/// one informative and one pure-noise summary.
#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct NormalToyModel {
    pub prior_sd: f64,
    pub s1_sd: f64,
    pub s2_sd: f64,
}

impl Default for NormalToyModel {
    fn default() -> Self {
        Self {
            prior_sd: 100.0,
            s1_sd: 0.1,
            s2_sd: 1.0,
        }
    }
}

impl NormalToyModel {
    /// The observation used throughout: both summaries at zero.
    pub fn observed() -> Vec<f64> {
        vec![0.0, 0.0]
    }
}

pub fn normal_toy_simulate(model: &NormalToyModel, theta: f64, rng: &mut RngStream) -> [f64; 2] {
    let z1: f64 = StandardNormal.sample(rng);
    let z2: f64 = StandardNormal.sample(rng);
    [theta + model.s1_sd * z1, model.s2_sd * z2]
}

impl SimulationModel for NormalToyModel {
    fn name(&self) -> &str {
        "normal"
    }

    fn n_params(&self) -> usize {
        1
    }

    fn n_summaries(&self) -> usize {
        2
    }

    fn sample_prior(&self, rng: &mut RngStream) -> Vec<f64> {
        let z: f64 = StandardNormal.sample(rng);
        vec![self.prior_sd * z]
    }

    fn prior_density(&self, theta: &[f64]) -> f64 {
        let z = theta[0] / self.prior_sd;
        libm::exp(-0.5 * z * z) / (self.prior_sd * libm::sqrt(2.0 * core::f64::consts::PI))
    }

    fn simulate(&self, theta: &[f64], rng: &mut RngStream) -> Simulation {
        Simulation::Complete(normal_toy_simulate(self, theta[0], rng).to_vec())
    }
}
