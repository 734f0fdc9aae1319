//! ABC-PMC that simulates `M = ceil(N / alpha)` acceptances under the previous
//! nested rule, re-scales the distance from those simulations, and keeps the
//! `N` closest.

use alloc::vec::Vec;

use rand::RngCore;

use super::engine::{Candidate, Engine, AUX_STREAM};
use super::executor::Executor;
use super::record::{Algorithm, IterationRecord, RunConfig, RunRecord, Termination};
use crate::distance::{eccentricity_ratio, NestedAcceptanceRule, Stage};
use crate::error::{Error, Result};
use crate::model::SimulationModel;
use crate::population::{build_importance_density, ParticlePopulation};
use crate::stats::robust_ceil;

/// `M = ceil(N / alpha)`.
pub fn adapt_curr_population_target(population_size: usize, alpha: f64) -> Result<usize> {
    if !(alpha > 0.0 && alpha <= 1.0) {
        return Err(Error::InvalidArgument(alloc::format!("alpha must lie in (0, 1], got {alpha}")));
    }
    Ok(robust_ceil(population_size as f64 / alpha) as usize)
}

pub fn abc_pmc_adapt_curr<M, E>(
    model: &M,
    observed: &[f64],
    config: &RunConfig,
    executor: &E,
) -> Result<RunRecord>
where
    M: SimulationModel + ?Sized,
    E: Executor,
{
    run(model, observed, config, executor, usize::MAX)
}

/// The stage `(d^1, h_1)` from the first iteration of
/// [`abc_pmc_adapt_curr`], for reuse as shared tuning by the other
/// algorithms. `None` if the budget cannot cover that iteration.
pub fn first_iteration_tuning<M, E>(
    model: &M,
    observed: &[f64],
    config: &RunConfig,
    executor: &E,
) -> Result<Option<Stage>>
where
    M: SimulationModel + ?Sized,
    E: Executor,
{
    let record = run(model, observed, config, executor, 1)?;
    Ok(record.iterations.first().and_then(|it| it.stage.clone()))
}

fn run<M, E>(
    model: &M,
    observed: &[f64],
    config: &RunConfig,
    executor: &E,
    max_iterations: usize,
) -> Result<RunRecord>
where
    M: SimulationModel + ?Sized,
    E: Executor,
{
    let mut engine = Engine::new(model, observed, config, executor)?;
    let n = config.population_size;
    let m = adapt_curr_population_target(n, config.alpha)?;
    let mut rule = NestedAcceptanceRule::new();
    let mut previous: Option<ParticlePopulation> = None;
    let mut t = 1;

    let termination = loop {
        if t > max_iterations {
            break Termination::IterationLimit;
        }
        if engine.remaining() < m as u64 {
            break Termination::BudgetExhausted;
        }
        let q = build_importance_density(previous.as_ref(), false)?;
        let Some(collected) = engine.collect(t, &q, m, |s| rule.passes(s, observed))? else {
            break Termination::BudgetExhausted;
        };

        let scaled = engine.scaled_distance(&collected.stored)?;
        let distance = scaled.distance;
        let mut tie_rng = engine.iteration_stream(t).fork(AUX_STREAM);
        let mut scored: Vec<(Candidate, f64, u64)> = collected
            .accepted
            .into_iter()
            .map(|c| {
                let dist = distance.eval(&c.summary, observed);
                (c, dist, tie_rng.next_u64())
            })
            .collect();
        scored.sort_by(|a, b| a.1.total_cmp(&b.1).then(a.2.cmp(&b.2)));
        scored.truncate(n);
        let threshold = scored.last().expect("n >= 1").1;
        let kept: Vec<(Candidate, f64)> = scored.into_iter().map(|(c, d, _)| (c, d)).collect();
        let population = engine.weigh(t, &q, kept)?;
        let stage = Stage::new(distance, threshold)?;

        let record = IterationRecord {
            iteration: t,
            importance_weight_ratio: population.weight_ratio(),
            population: population.clone(),
            eccentricity: Some(eccentricity_ratio(&stage.distance)?),
            stage: Some(stage.clone()),
            next_stage: None,
            accepted: m,
            simulations: collected.simulations,
            cumulative_simulations: 0,
            incomplete: collected.incomplete,
            support_rejections: collected.support_rejections,
            zero_scale_summaries: scaled.zero_scale,
        };
        engine.push(record);

        rule.push(stage)?;
        previous = Some(population);
        t += 1;
    };
    Ok(engine.finish(Algorithm::PmcAdaptCurr, termination))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn m_arithmetic() {
        assert_eq!(adapt_curr_population_target(1000, 0.5).unwrap(), 2000);
        assert_eq!(adapt_curr_population_target(1000, 0.3).unwrap(), 3334);
        assert_eq!(adapt_curr_population_target(3, 0.1).unwrap(), 30);
        assert_eq!(adapt_curr_population_target(7, 0.5).unwrap(), 14);
        assert_eq!(adapt_curr_population_target(200, 0.5).unwrap(), 400);
        assert!(adapt_curr_population_target(10, 0.0).is_err());
    }
}
