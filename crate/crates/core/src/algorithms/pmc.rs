//! ABC-PMC with quantile thresholds and a distance fixed after iteration one.

use alloc::vec::Vec;

use super::engine::{Candidate, Engine};
use super::executor::Executor;
use super::record::{Algorithm, IterationRecord, RunConfig, RunRecord, Termination};
use crate::distance::{eccentricity_ratio, DistanceFunction, Stage};
use crate::error::{check_dim, Error, Result};
use crate::model::SimulationModel;
use crate::population::{build_importance_density, ParticlePopulation};
use crate::stats::empirical_quantile;

/// How the distance is chosen.
#[derive(Clone, Debug, PartialEq)]
pub enum InitialDistance {
    /// MAD-scaled weights from the first iteration's simulations, which then
    /// accept everything (`h_1` must be infinite).
    Mad,
    /// A distance supplied up front.
    Fixed(DistanceFunction),
}

#[derive(Clone, Debug, PartialEq)]
pub struct PmcOptions {
    pub initial_distance: InitialDistance,
    /// `h_1`; ignored when `schedule` is given.
    pub initial_threshold: f64,
    /// Fixed thresholds `h_1, h_2, ...` replacing the quantile rule. The run
    /// ends when the schedule does.
    pub schedule: Option<Vec<f64>>,
}

impl PmcOptions {
    /// Infinite `h_1` and MAD weights from the first iteration.
    pub fn adaptive() -> Self {
        Self {
            initial_distance: InitialDistance::Mad,
            initial_threshold: f64::INFINITY,
            schedule: None,
        }
    }

    /// Distance and `h_1` given, e.g. tuned by another algorithm.
    pub fn tuned(distance: DistanceFunction, h1: f64) -> Self {
        Self {
            initial_distance: InitialDistance::Fixed(distance),
            initial_threshold: h1,
            schedule: None,
        }
    }

    pub fn with_schedule(mut self, schedule: Vec<f64>) -> Self {
        self.schedule = Some(schedule);
        self
    }

    fn first_threshold(&self) -> Result<f64> {
        let h1 = match &self.schedule {
            Some(s) => *s.first().ok_or(Error::Empty("threshold schedule"))?,
            None => self.initial_threshold,
        };
        if h1.is_nan() || h1 < 0.0 {
            return Err(Error::InvalidArgument(alloc::format!("invalid first threshold {h1}")));
        }
        if matches!(self.initial_distance, InitialDistance::Mad) && h1 != f64::INFINITY {
            return Err(Error::InvalidArgument(
                "a MAD-tuned first distance requires an infinite first threshold".into(),
            ));
        }
        Ok(h1)
    }
}

/// ABC-PMC. With [`PmcOptions::adaptive`] the distance is MAD-weighted from
/// the first (accept-everything) iteration and then frozen.
pub fn abc_pmc<M, E>(
    model: &M,
    observed: &[f64],
    config: &RunConfig,
    options: &PmcOptions,
    executor: &E,
) -> Result<RunRecord>
where
    M: SimulationModel + ?Sized,
    E: Executor,
{
    let mut engine = Engine::new(model, observed, config, executor)?;
    let h1 = options.first_threshold()?;
    if let Some(s) = &options.schedule {
        if s.iter().any(|h| h.is_nan() || *h < 0.0) {
            return Err(Error::InvalidArgument("threshold schedule has negative entries".into()));
        }
    }
    let mut distance = match &options.initial_distance {
        InitialDistance::Fixed(d) => {
            check_dim("distance weights", observed.len(), d.dim())?;
            Some(d.clone())
        }
        InitialDistance::Mad => None,
    };
    let h1_infinite = h1 == f64::INFINITY;
    let n = config.population_size;
    let mut previous: Option<ParticlePopulation> = None;
    let mut threshold = h1;
    let mut t = 1;

    let termination = loop {
        if engine.remaining() == 0 {
            break Termination::BudgetExhausted;
        }
        let q = build_importance_density(previous.as_ref(), h1_infinite)?;
        let collected = match &distance {
            Some(d) => {
                let h = threshold;
                engine.collect(t, &q, n, |s| d.eval(s, observed) <= h)?
            }
            None => engine.collect(t, &q, n, |_| true)?,
        };
        let Some(collected) = collected else {
            break Termination::BudgetExhausted;
        };

        let mut zero_scale = Vec::new();
        if distance.is_none() {
            let scaled = engine.scaled_distance(&collected.stored)?;
            zero_scale = scaled.zero_scale;
            distance = Some(scaled.distance);
        }
        let d = distance.clone().expect("distance set above");
        let scored: Vec<(Candidate, f64)> = collected
            .accepted
            .into_iter()
            .map(|c| {
                let dist = d.eval(&c.summary, observed);
                (c, dist)
            })
            .collect();
        let distances: Vec<f64> = scored.iter().map(|(_, dist)| *dist).collect();
        let population = engine.weigh(t, &q, scored)?;

        let next_threshold = match &options.schedule {
            Some(s) => s.get(t).copied(),
            None => Some(empirical_quantile(&distances, config.alpha)?),
        };
        let record = IterationRecord {
            iteration: t,
            importance_weight_ratio: population.weight_ratio(),
            population: population.clone(),
            stage: Some(Stage::new(d.clone(), threshold)?),
            next_stage: next_threshold.map(|h| Stage::new(d.clone(), h)).transpose()?,
            accepted: n,
            simulations: collected.simulations,
            cumulative_simulations: 0,
            incomplete: collected.incomplete,
            support_rejections: collected.support_rejections,
            eccentricity: Some(eccentricity_ratio(&d)?),
            zero_scale_summaries: zero_scale,
        };
        engine.push(record);

        let Some(h_next) = next_threshold else {
            break Termination::ScheduleComplete;
        };
        previous = Some(population);
        threshold = h_next;
        t += 1;
    };
    Ok(engine.finish(Algorithm::Pmc, termination))
}
