//! ABC importance sampling: one pass of proposals from a fixed density.

use alloc::vec::Vec;

use super::engine::Engine;
use super::executor::Executor;
use super::record::RunConfig;
use crate::distance::NestedAcceptanceRule;
use crate::error::{check_dim, Result};
use crate::model::SimulationModel;
use crate::population::{importance_weight, ImportanceDensity, Particle};

/// Simulates `config.population_size` proposals from `q` and returns the
/// accepted ones weighted by `prior / q`. Particle distances are measured
/// with the rule's last stage, if any.
pub fn abc_importance<M, E>(
    model: &M,
    observed: &[f64],
    q: &ImportanceDensity,
    rule: &NestedAcceptanceRule,
    config: &RunConfig,
    executor: &E,
) -> Result<Vec<Particle>>
where
    M: SimulationModel + ?Sized,
    E: Executor,
{
    if let Some(stage) = rule.last() {
        check_dim("acceptance rule", observed.len(), stage.distance.dim())?;
    }
    let draws = config.population_size;
    let config = RunConfig {
        budget: draws as u64,
        ..config.clone()
    };
    let mut engine = Engine::new(model, observed, &config, executor)?;
    let collected = engine.simulate_all(1, q)?;
    collected
        .accepted
        .into_iter()
        .filter(|c| rule.passes(&c.summary, observed))
        .map(|c| {
            let weight = importance_weight(&c.theta, q, model)?;
            let distance = rule.last().map(|s| s.distance.eval(&c.summary, observed));
            Ok(Particle {
                theta: c.theta,
                summary: c.summary,
                weight,
                distance,
            })
        })
        .collect()
}
