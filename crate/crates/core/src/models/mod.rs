//! Benchmark generative models.

mod gk;
mod lotka_volterra;
mod normal;
mod observed;

pub use gk::{gk_quantile, gk_simulate_order_stats, GkModel, GkParams};
pub use lotka_volterra::{
    hazards, lv_gillespie, lv_trajectory, next_event, LotkaVolterraModel, Reaction, Trajectory,
};
pub use normal::{normal_toy_simulate, NormalToyModel};
pub use observed::{make_observed_dataset, ObservedDataset};

use alloc::vec::Vec;

use crate::model::{Simulation, SimulationModel};
use crate::rng::RngStream;

/// Uniform box prior shared by the g-and-k and Lotka-Volterra models.
#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct UniformBox {
    pub lower: f64,
    pub upper: f64,
    pub dim: usize,
}

impl UniformBox {
    pub fn sample(&self, rng: &mut RngStream) -> Vec<f64> {
        (0..self.dim)
            .map(|_| self.lower + (self.upper - self.lower) * rng.open01())
            .collect()
    }

    pub fn density(&self, x: &[f64]) -> f64 {
        if x.len() == self.dim && x.iter().all(|v| *v > self.lower && *v < self.upper) {
            libm::pow(self.upper - self.lower, -(self.dim as f64))
        } else {
            0.0
        }
    }
}

/// Any of the bundled models, for runtime dispatch.
#[derive(Clone, Debug)]
pub enum Benchmark {
    Normal(NormalToyModel),
    Gk(GkModel),
    LotkaVolterra(LotkaVolterraModel),
}

impl Benchmark {
    fn inner(&self) -> &dyn SimulationModel {
        match self {
            Benchmark::Normal(m) => m,
            Benchmark::Gk(m) => m,
            Benchmark::LotkaVolterra(m) => m,
        }
    }
}

impl SimulationModel for Benchmark {
    fn name(&self) -> &str {
        self.inner().name()
    }

    fn n_params(&self) -> usize {
        self.inner().n_params()
    }

    fn n_summaries(&self) -> usize {
        self.inner().n_summaries()
    }

    fn sample_prior(&self, rng: &mut RngStream) -> Vec<f64> {
        self.inner().sample_prior(rng)
    }

    fn prior_density(&self, theta: &[f64]) -> f64 {
        self.inner().prior_density(theta)
    }

    fn simulate(&self, theta: &[f64], rng: &mut RngStream) -> Simulation {
        self.inner().simulate(theta, rng)
    }
}
