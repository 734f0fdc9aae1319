//! ABC-PMC whose distance at iteration `t + 1` is re-scaled from all of
//! iteration `t`'s simulations, with nested acceptance.

use alloc::vec::Vec;

use super::engine::{Candidate, Engine};
use super::executor::Executor;
use super::record::{Algorithm, IterationRecord, RunConfig, RunRecord, Termination};
use crate::distance::{eccentricity_ratio, NestedAcceptanceRule, Stage};
use crate::error::{check_dim, Result};
use crate::model::SimulationModel;
use crate::population::{build_importance_density, ParticlePopulation};
use crate::stats::empirical_quantile;

#[derive(Clone, Debug, Default, PartialEq)]
pub struct AdaptPrevOptions {
    /// Acceptance stage for the first iteration (e.g. shared tuning from the
    /// current-iteration variant). Without it the first iteration accepts
    /// everything.
    pub initial_stage: Option<Stage>,
}

pub fn abc_pmc_adapt_prev<M, E>(
    model: &M,
    observed: &[f64],
    config: &RunConfig,
    options: &AdaptPrevOptions,
    executor: &E,
) -> Result<RunRecord>
where
    M: SimulationModel + ?Sized,
    E: Executor,
{
    let mut engine = Engine::new(model, observed, config, executor)?;
    let mut rule = NestedAcceptanceRule::new();
    if let Some(stage) = &options.initial_stage {
        check_dim("initial stage", observed.len(), stage.distance.dim())?;
        rule.push(stage.clone())?;
    }
    let h1_infinite = rule.last().map_or(true, |s| s.threshold == f64::INFINITY);
    let n = config.population_size;
    let mut previous: Option<ParticlePopulation> = None;
    let mut t = 1;

    let termination = loop {
        if engine.remaining() == 0 {
            break Termination::BudgetExhausted;
        }
        let q = build_importance_density(previous.as_ref(), h1_infinite)?;
        let Some(collected) = engine.collect(t, &q, n, |s| rule.passes(s, observed))? else {
            break Termination::BudgetExhausted;
        };

        // scales from every complete simulation of this iteration, rejected ones included
        let scaled = engine.scaled_distance(&collected.stored)?;
        let next_distance = scaled.distance;
        let scored: Vec<(Candidate, f64)> = collected
            .accepted
            .into_iter()
            .map(|c| {
                let dist = next_distance.eval(&c.summary, observed);
                (c, dist)
            })
            .collect();
        let distances: Vec<f64> = scored.iter().map(|(_, dist)| *dist).collect();
        let population = engine.weigh(t, &q, scored)?;
        let next_stage = Stage::new(next_distance, empirical_quantile(&distances, config.alpha)?)?;

        let record = IterationRecord {
            iteration: t,
            importance_weight_ratio: population.weight_ratio(),
            population: population.clone(),
            stage: rule.last().cloned(),
            eccentricity: Some(eccentricity_ratio(&next_stage.distance)?),
            next_stage: Some(next_stage.clone()),
            accepted: n,
            simulations: collected.simulations,
            cumulative_simulations: 0,
            incomplete: collected.incomplete,
            support_rejections: collected.support_rejections,
            zero_scale_summaries: scaled.zero_scale,
        };
        engine.push(record);

        rule.push(next_stage)?;
        previous = Some(population);
        t += 1;
    };
    Ok(engine.finish(Algorithm::PmcAdaptPrev, termination))
}
