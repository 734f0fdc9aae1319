use alloc::string::String;
use alloc::vec::Vec;

use crate::distance::{NestedAcceptanceRule, Stage};
use crate::error::{Error, Result};
use crate::population::ParticlePopulation;

/// Tuning shared by all algorithms.
#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct RunConfig {
    /// Particles per population (`N`). For rejection sampling, the number of
    /// prior draws.
    pub population_size: usize,
    /// Quantile level for thresholds; must satisfy `0 < alpha < 1`.
    pub alpha: f64,
    /// Total simulations allowed.
    pub budget: u64,
    /// At most this many summaries per iteration feed the scale estimates.
    pub scale_store_cap: usize,
    /// Optional distance-weight regularization `w_i + delta * max w`.
    pub delta: Option<f64>,
    pub seed: u64,
}

pub const DEFAULT_SCALE_STORE_CAP: usize = 10_000;

impl RunConfig {
    pub fn new(population_size: usize, alpha: f64, budget: u64, seed: u64) -> Self {
        Self {
            population_size,
            alpha,
            budget,
            scale_store_cap: DEFAULT_SCALE_STORE_CAP,
            delta: None,
            seed,
        }
    }

    pub fn with_delta(mut self, delta: f64) -> Self {
        self.delta = Some(delta);
        self
    }

    pub fn with_scale_store_cap(mut self, cap: usize) -> Self {
        self.scale_store_cap = cap;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |msg: String| Err(Error::InvalidArgument(msg));
        if self.population_size == 0 {
            return fail("population size must be positive".into());
        }
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return fail(alloc::format!("alpha must satisfy 0 < alpha < 1, got {}", self.alpha));
        }
        if self.budget < self.population_size as u64 {
            return fail(alloc::format!(
                "budget {} is smaller than the population size {}",
                self.budget,
                self.population_size
            ));
        }
        if self.scale_store_cap == 0 {
            return fail("scale_store_cap must be positive".into());
        }
        if let Some(delta) = self.delta {
            if !(delta > 0.0 && delta.is_finite()) {
                return fail(alloc::format!("delta must be positive, got {delta}"));
            }
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "kebab-case"))]
pub enum Algorithm {
    Rejection,
    Importance,
    /// ABC-PMC with a distance fixed after the first iteration.
    Pmc,
    /// Distance re-scaled from the previous iteration's simulations.
    PmcAdaptPrev,
    /// Distance re-scaled from the current iteration's simulations.
    PmcAdaptCurr,
}

impl Algorithm {
    pub fn id(self) -> &'static str {
        match self {
            Algorithm::Rejection => "rejection",
            Algorithm::Importance => "importance",
            Algorithm::Pmc => "pmc",
            Algorithm::PmcAdaptPrev => "pmc-adapt-prev",
            Algorithm::PmcAdaptCurr => "pmc-adapt-curr",
        }
    }

    pub fn from_id(id: &str) -> Option<Self> {
        [
            Algorithm::Rejection,
            Algorithm::Importance,
            Algorithm::Pmc,
            Algorithm::PmcAdaptPrev,
            Algorithm::PmcAdaptCurr,
        ]
        .into_iter()
        .find(|a| a.id() == id)
    }

    /// Whether acceptance accumulates every earlier stage.
    pub fn is_nested(self) -> bool {
        matches!(self, Algorithm::PmcAdaptPrev | Algorithm::PmcAdaptCurr)
    }
}

/// One completed iteration.
#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct IterationRecord {
    pub iteration: usize,
    pub population: ParticlePopulation,
    /// Newest acceptance stage in force for this iteration's population;
    /// `None` when everything was accepted without a distance.
    pub stage: Option<Stage>,
    /// Stage prepared at the end of the iteration for the next one.
    pub next_stage: Option<Stage>,
    /// Simulations that passed the acceptance rule (`M` for the
    /// current-iteration variant, `N` otherwise).
    pub accepted: usize,
    pub simulations: u64,
    pub cumulative_simulations: u64,
    pub incomplete: u64,
    pub support_rejections: u64,
    /// Largest over smallest importance weight in the population.
    #[cfg_attr(feature = "serde", serde(with = "crate::serde_f64"))]
    pub importance_weight_ratio: f64,
    /// Max/min positive distance weight of the distance built (or, for the
    /// fixed-distance algorithm, used) in this iteration.
    #[cfg_attr(feature = "serde", serde(with = "crate::serde_f64::option"))]
    pub eccentricity: Option<f64>,
    pub zero_scale_summaries: Vec<usize>,
}

impl IterationRecord {
    /// Distance weights characterising this iteration.
    pub fn weights(&self) -> Option<&[f64]> {
        self.stage
            .as_ref()
            .or(self.next_stage.as_ref())
            .map(|s| s.distance.weights())
    }

    /// `h_t`, infinite when nothing constrained acceptance.
    pub fn threshold(&self) -> f64 {
        self.stage.as_ref().map_or(f64::INFINITY, |s| s.threshold)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "kebab-case"))]
pub enum Termination {
    /// The next iteration could not be completed within the budget.
    BudgetExhausted,
    /// A fixed threshold schedule ran out.
    ScheduleComplete,
    /// Single-pass algorithms (rejection, importance sampling).
    Finished,
    /// An explicit iteration limit was reached.
    IterationLimit,
}

/// Everything a run produced.
#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct RunRecord {
    pub algorithm: Algorithm,
    pub model: String,
    pub config: RunConfig,
    pub observed: Vec<f64>,
    pub iterations: Vec<IterationRecord>,
    pub termination: Termination,
    /// Simulations charged to the budget, including a discarded partial
    /// iteration.
    pub simulations_used: u64,
    pub partial_iteration_simulations: u64,
    /// Simulations run speculatively by a batched executor and discarded.
    pub speculative_simulations: u64,
    pub workers: usize,
}

impl RunRecord {
    pub fn final_iteration(&self) -> Option<&IterationRecord> {
        self.iterations.last()
    }

    pub fn final_population(&self) -> Option<&ParticlePopulation> {
        self.iterations.last().map(|it| &it.population)
    }

    /// The acceptance region that iteration `index` (0-based) sampled under.
    pub fn acceptance_rule(&self, index: usize) -> NestedAcceptanceRule {
        let stages = if self.algorithm.is_nested() {
            self.iterations[..=index]
                .iter()
                .filter_map(|it| it.stage.clone())
                .collect()
        } else {
            self.iterations[index].stage.clone().into_iter().collect()
        };
        NestedAcceptanceRule::from_stages(stages).expect("recorded stages share a dimension")
    }
}
