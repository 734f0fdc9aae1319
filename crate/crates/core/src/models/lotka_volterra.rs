//! Stochastic Lotka-Volterra predator-prey jump process, simulated exactly
//! with the Gillespie algorithm and observed with Gaussian noise.

use alloc::vec::Vec;

use rand_distr::{Distribution, StandardNormal};

use super::UniformBox;
use crate::model::{Simulation, SimulationModel};
use crate::rng::RngStream;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Reaction {
    /// `(x1, x2) -> (x1 + 1, x2)`
    PreyBirth,
    /// `(x1, x2) -> (x1 - 1, x2 + 1)`
    Predation,
    /// `(x1, x2) -> (x1, x2 - 1)`
    PredatorDeath,
}

impl Reaction {
    pub fn apply(self, (x1, x2): (u64, u64)) -> (u64, u64) {
        match self {
            Reaction::PreyBirth => (x1 + 1, x2),
            Reaction::Predation => (x1 - 1, x2 + 1),
            Reaction::PredatorDeath => (x1, x2 - 1),
        }
    }
}

/// Hazards `(r1 x1, r2 x1 x2, r3 x2)` on the natural rate scale.
pub fn hazards((x1, x2): (u64, u64), rates: [f64; 3]) -> [f64; 3] {
    let (x1, x2) = (x1 as f64, x2 as f64);
    [rates[0] * x1, rates[1] * x1 * x2, rates[2] * x2]
}

/// Holding time and type of the next transition; `None` once every hazard
/// vanishes (the state is absorbing).
pub fn next_event(state: (u64, u64), rates: [f64; 3], rng: &mut RngStream) -> Option<(f64, Reaction)> {
    let h = hazards(state, rates);
    let total = h[0] + h[1] + h[2];
    if !(total > 0.0) {
        return None;
    }
    let dt = -libm::log(rng.open01()) / total;
    let u = rng.open01() * total;
    let reaction = if u < h[0] {
        Reaction::PreyBirth
    } else if u < h[0] + h[1] || h[2] == 0.0 {
        Reaction::Predation
    } else {
        Reaction::PredatorDeath
    };
    Some((dt, reaction))
}

/// Noise-free states latched at the observation times.
#[derive(Clone, Debug, PartialEq)]
pub enum Trajectory {
    Complete(Vec<(u64, u64)>),
    /// The transition cap was reached before the last observation time.
    Capped,
}

#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct LotkaVolterraModel {
    pub x1_0: u64,
    pub x2_0: u64,
    /// Increasing observation times.
    pub obs_times: Vec<f64>,
    pub obs_noise_sd: f64,
    pub transition_cap: u64,
    /// Prior on `(log r1, log r2, log r3)`.
    pub prior: UniformBox,
}

impl Default for LotkaVolterraModel {
    fn default() -> Self {
        Self {
            x1_0: 50,
            x2_0: 100,
            obs_times: (1..=16).map(|i| 2.0 * i as f64).collect(),
            obs_noise_sd: libm::exp(2.3),
            transition_cap: 100_000,
            prior: UniformBox {
                lower: -6.0,
                upper: 2.0,
                dim: 3,
            },
        }
    }
}

/// Exact Gillespie path from the initial state. The recorded state at an
/// observation time is the state after the last transition at or before it.
pub fn lv_trajectory(rates: [f64; 3], model: &LotkaVolterraModel, rng: &mut RngStream) -> Trajectory {
    let times = &model.obs_times;
    let mut states = Vec::with_capacity(times.len());
    let mut state = (model.x1_0, model.x2_0);
    let mut now = 0.0;
    let mut transitions = 0u64;
    while states.len() < times.len() {
        let Some((dt, reaction)) = next_event(state, rates, rng) else {
            states.resize(times.len(), state);
            break;
        };
        let next = now + dt;
        while states.len() < times.len() && times[states.len()] < next {
            states.push(state);
        }
        if states.len() == times.len() {
            break;
        }
        state = reaction.apply(state);
        transitions += 1;
        if transitions >= model.transition_cap {
            return Trajectory::Capped;
        }
        now = next;
    }
    Trajectory::Complete(states)
}

/// Noisy observations `(x1(t_1..t_k), x2(t_1..t_k))`, or `Incomplete` when
/// the trajectory hit the transition cap.
pub fn lv_gillespie(rates: [f64; 3], model: &LotkaVolterraModel, rng: &mut RngStream) -> Simulation {
    let Trajectory::Complete(states) = lv_trajectory(rates, model, rng) else {
        return Simulation::Incomplete;
    };
    let sd = model.obs_noise_sd;
    let mut noise = || -> f64 {
        let z: f64 = StandardNormal.sample(rng);
        sd * z
    };
    let prey = states.iter().map(|s| s.0 as f64 + noise()).collect::<Vec<_>>();
    let predators = states.iter().map(|s| s.1 as f64 + noise());
    Simulation::Complete(prey.into_iter().chain(predators).collect())
}

impl SimulationModel for LotkaVolterraModel {
    fn name(&self) -> &str {
        "lotka-volterra"
    }

    fn n_params(&self) -> usize {
        3
    }

    fn n_summaries(&self) -> usize {
        2 * self.obs_times.len()
    }

    fn sample_prior(&self, rng: &mut RngStream) -> Vec<f64> {
        self.prior.sample(rng)
    }

    fn prior_density(&self, theta: &[f64]) -> f64 {
        self.prior.density(theta)
    }

    fn simulate(&self, theta: &[f64], rng: &mut RngStream) -> Simulation {
        let rates = [libm::exp(theta[0]), libm::exp(theta[1]), libm::exp(theta[2])];
        lv_gillespie(rates, self, rng)
    }
}
