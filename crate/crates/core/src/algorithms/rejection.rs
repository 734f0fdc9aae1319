//! ABC-rejection.

use alloc::vec::Vec;

use super::engine::{Candidate, Engine};
use super::executor::Executor;
use super::record::{Algorithm, IterationRecord, RunConfig, RunRecord, Termination};
use crate::distance::{eccentricity_ratio, DistanceFunction, Stage};
use crate::error::{check_dim, Error, Result};
use crate::model::SimulationModel;
use crate::population::{ImportanceDensity, Particle, ParticlePopulation};

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum RejectionThreshold {
    /// Accept distances `<= h`.
    Fixed(f64),
    /// Accept the `k` smallest distances.
    TopK(usize),
}

#[derive(Clone, Debug, PartialEq)]
pub enum RejectionDistance {
    Fixed(DistanceFunction),
    /// `1 / MAD` weights from the simulated summaries themselves.
    Mad,
}

#[derive(Clone, Debug)]
pub struct RejectionOutput {
    /// Accepted particles, all with weight 1.
    pub particles: Vec<Particle>,
    /// Distance and threshold actually used.
    pub stage: Stage,
    /// Single-iteration record (empty when nothing was accepted).
    pub record: RunRecord,
}

/// Draws `config.population_size` parameters from the prior, simulates each
/// and keeps those close to `observed`. `config.alpha` is not used.
pub fn abc_rejection<M, E>(
    model: &M,
    observed: &[f64],
    config: &RunConfig,
    threshold: RejectionThreshold,
    distance: &RejectionDistance,
    executor: &E,
) -> Result<RejectionOutput>
where
    M: SimulationModel + ?Sized,
    E: Executor,
{
    let draws = config.population_size;
    match threshold {
        RejectionThreshold::Fixed(h) if h.is_nan() || h < 0.0 => {
            return Err(Error::InvalidArgument(alloc::format!("invalid threshold {h}")));
        }
        RejectionThreshold::TopK(k) if k == 0 || k > draws => {
            return Err(Error::InvalidArgument(alloc::format!(
                "top-k needs 1 <= k <= {draws}, got {k}"
            )));
        }
        _ => {}
    }
    let config = RunConfig {
        budget: draws as u64,
        scale_store_cap: config.scale_store_cap.max(draws),
        ..config.clone()
    };
    let mut engine = Engine::new(model, observed, &config, executor)?;
    let q = ImportanceDensity::Prior;
    let collected = engine.simulate_all(1, &q)?;

    let mut zero_scale = Vec::new();
    let d = match distance {
        RejectionDistance::Fixed(d) => {
            check_dim("distance weights", observed.len(), d.dim())?;
            d.clone()
        }
        RejectionDistance::Mad => {
            let scaled = engine.scaled_distance(&collected.stored)?;
            zero_scale = scaled.zero_scale;
            scaled.distance
        }
    };
    let mut scored: Vec<(usize, Candidate, f64)> = collected
        .accepted
        .into_iter()
        .enumerate()
        .map(|(i, c)| {
            let dist = d.eval(&c.summary, observed);
            (i, c, dist)
        })
        .collect();
    let h = match threshold {
        RejectionThreshold::Fixed(h) => {
            scored.retain(|(_, _, dist)| *dist <= h);
            h
        }
        RejectionThreshold::TopK(k) => {
            // stable in simulation order among equal distances
            scored.sort_by(|a, b| a.2.total_cmp(&b.2).then(a.0.cmp(&b.0)));
            scored.truncate(k);
            scored.last().map_or(0.0, |s| s.2)
        }
    };
    let stage = Stage::new(d, h)?;
    let particles: Vec<Particle> = scored
        .into_iter()
        .map(|(_, c, dist)| Particle {
            theta: c.theta,
            summary: c.summary,
            weight: 1.0,
            distance: Some(dist),
        })
        .collect();

    if particles.is_empty() {
        log::warn!("rejection sampling accepted no particles at threshold {h}");
    } else {
        let population = ParticlePopulation::new(particles.clone(), 1)?;
        engine.push(IterationRecord {
            iteration: 1,
            importance_weight_ratio: 1.0,
            population,
            stage: Some(stage.clone()),
            next_stage: None,
            accepted: particles.len(),
            simulations: collected.simulations,
            cumulative_simulations: 0,
            incomplete: collected.incomplete,
            support_rejections: collected.support_rejections,
            eccentricity: Some(eccentricity_ratio(&stage.distance)?),
            zero_scale_summaries: zero_scale,
        });
    }
    Ok(RejectionOutput {
        particles,
        stage,
        record: engine.finish(Algorithm::Rejection, Termination::Finished),
    })
}
