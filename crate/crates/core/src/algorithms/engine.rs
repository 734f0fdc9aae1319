//! Shared machinery: budget accounting, the propose-simulate-test loop,
//! scale estimation and importance weighting.

use alloc::vec::Vec;

use super::executor::Executor;
use super::record::{Algorithm, IterationRecord, RunConfig, RunRecord, Termination};
use crate::distance::{regularize_weights, weights_from_scales, ScaledDistance};
use crate::error::{check_dim, Result};
use crate::model::{Simulation, SimulationModel};
use crate::population::{
    importance_weight, sample_proposal, ImportanceDensity, Particle, ParticlePopulation,
};
use crate::rng::RngStream;
use crate::stats::column_mads;

/// Substream index reserved for per-iteration bookkeeping draws (tie-breaks).
pub(crate) const AUX_STREAM: u64 = u64::MAX;

pub(crate) struct Candidate {
    pub theta: Vec<f64>,
    pub summary: Vec<f64>,
}

pub(crate) struct Collection {
    pub accepted: Vec<Candidate>,
    pub simulations: u64,
    pub incomplete: u64,
    pub support_rejections: u64,
    /// Complete summaries of the first `scale_store_cap` simulations,
    /// accepted or not.
    pub stored: Vec<Vec<f64>>,
}

struct Draw {
    theta: Vec<f64>,
    outcome: Simulation,
    support_rejections: u64,
}

pub(crate) struct Engine<'a, M: ?Sized, E> {
    pub model: &'a M,
    pub observed: &'a [f64],
    pub config: &'a RunConfig,
    executor: &'a E,
    root: RngStream,
    used: u64,
    partial: u64,
    speculative: u64,
    pub iterations: Vec<IterationRecord>,
}

impl<'a, M: SimulationModel + ?Sized, E: Executor> Engine<'a, M, E> {
    pub fn new(model: &'a M, observed: &'a [f64], config: &'a RunConfig, executor: &'a E) -> Result<Self> {
        config.validate()?;
        check_dim("observed summaries", model.n_summaries(), observed.len())?;
        if observed.iter().any(|v| !v.is_finite()) {
            return Err(crate::Error::NonFinite("observed summaries"));
        }
        Ok(Self {
            model,
            observed,
            config,
            executor,
            root: RngStream::new(config.seed),
            used: 0,
            partial: 0,
            speculative: 0,
            iterations: Vec::new(),
        })
    }

    pub fn remaining(&self) -> u64 {
        self.config.budget - self.used
    }

    pub fn iteration_stream(&self, t: usize) -> RngStream {
        self.root.fork(t as u64)
    }

    /// Simulates from `q` until `target` summaries pass `accept` or the
    /// budget runs out. Returns `None` in the latter case, after charging the
    /// partial iteration.
    pub fn collect<A>(
        &mut self,
        t: usize,
        q: &ImportanceDensity,
        target: usize,
        accept: A,
    ) -> Result<Option<Collection>>
    where
        A: Fn(&[f64]) -> bool,
    {
        let out = self.simulate(t, q, target, accept)?;
        if out.accepted.len() < target {
            self.partial = out.simulations;
            log::info!(
                "iteration {t}: budget exhausted with {}/{target} acceptances; partial iteration discarded",
                out.accepted.len()
            );
            return Ok(None);
        }
        Ok(Some(out))
    }

    /// Spends the whole remaining budget in one pass; every complete
    /// simulation is returned as a candidate.
    pub fn simulate_all(&mut self, t: usize, q: &ImportanceDensity) -> Result<Collection> {
        self.simulate(t, q, usize::MAX, |_| true)
    }

    fn simulate<A>(
        &mut self,
        t: usize,
        q: &ImportanceDensity,
        target: usize,
        accept: A,
    ) -> Result<Collection>
    where
        A: Fn(&[f64]) -> bool,
    {
        let stream = self.iteration_stream(t);
        let model = self.model;
        let budget_left = self.remaining();
        let cap = self.config.scale_store_cap;
        let mut out = Collection {
            accepted: Vec::with_capacity(target.min(budget_left as usize)),
            simulations: 0,
            incomplete: 0,
            support_rejections: 0,
            stored: Vec::new(),
        };
        let batch = self.executor.batch_size().max(1) as u64;
        'outer: while out.accepted.len() < target && out.simulations < budget_left {
            let count = batch.min(budget_left - out.simulations) as usize;
            let draws = self.executor.map_indices(out.simulations, count, |j| {
                let mut rng = stream.fork(j);
                let proposal = sample_proposal(q, model, &mut rng)?;
                let outcome = model.simulate(&proposal.theta, &mut rng);
                Ok::<_, crate::Error>(Draw {
                    theta: proposal.theta,
                    outcome,
                    support_rejections: proposal.support_rejections,
                })
            });
            for (k, draw) in draws.into_iter().enumerate() {
                let draw = draw?;
                out.simulations += 1;
                out.support_rejections += draw.support_rejections;
                match draw.outcome {
                    Simulation::Incomplete => out.incomplete += 1,
                    Simulation::Complete(summary) => {
                        check_dim("simulated summaries", self.observed.len(), summary.len())?;
                        if out.stored.len() < cap {
                            out.stored.push(summary.clone());
                        }
                        if accept(&summary) {
                            out.accepted.push(Candidate {
                                theta: draw.theta,
                                summary,
                            });
                            if out.accepted.len() == target {
                                self.speculative += (count - k - 1) as u64;
                                break 'outer;
                            }
                        }
                    }
                }
            }
        }
        self.used += out.simulations;
        Ok(out)
    }

    /// MAD-scaled distance from stored summaries, regularized if configured.
    pub fn scaled_distance(&self, stored: &[Vec<f64>]) -> Result<ScaledDistance> {
        let scales = column_mads(stored, self.observed.len())?;
        let mut scaled = weights_from_scales(&scales)?;
        if let Some(delta) = self.config.delta {
            scaled.distance = regularize_weights(&scaled.distance, delta)?;
        }
        Ok(scaled)
    }

    /// Importance-weights accepted candidates into a population.
    pub fn weigh(
        &self,
        t: usize,
        q: &ImportanceDensity,
        accepted: Vec<(Candidate, f64)>,
    ) -> Result<ParticlePopulation> {
        let model = self.model;
        let weights = self.executor.map_indices(0, accepted.len(), |i| {
            importance_weight(&accepted[i as usize].0.theta, q, model)
        });
        let particles = accepted
            .into_iter()
            .zip(weights)
            .map(|((c, d), w)| {
                Ok(Particle {
                    theta: c.theta,
                    summary: c.summary,
                    weight: w?,
                    distance: Some(d),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        ParticlePopulation::new(particles, t)
    }

    pub fn push(&mut self, mut record: IterationRecord) {
        record.cumulative_simulations = self.used;
        self.iterations.push(record);
    }

    pub fn finish(self, algorithm: Algorithm, termination: Termination) -> RunRecord {
        RunRecord {
            algorithm,
            model: self.model.name().into(),
            config: self.config.clone(),
            observed: self.observed.to_vec(),
            iterations: self.iterations,
            termination,
            simulations_used: self.used,
            partial_iteration_simulations: self.partial,
            speculative_simulations: self.speculative,
            workers: self.executor.workers(),
        }
    }
}
