//! Post-run summaries computed purely from a [`RunRecord`].

use alloc::string::String;
use alloc::vec::Vec;

use crate::algorithms::RunRecord;
use crate::error::{check_dim, Error, Result};
use crate::population::ParticlePopulation;

/// Weighted MSE against a known truth, per iteration and parameter.
#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct MseSeries {
    /// Cumulative simulations at the end of each iteration.
    pub simulations: Vec<u64>,
    /// `mse[t][j]` for iteration `t` and parameter `j`.
    pub mse: Vec<Vec<f64>>,
}

impl MseSeries {
    pub fn last(&self) -> Option<&[f64]> {
        self.mse.last().map(|v| v.as_slice())
    }
}

/// Self-normalised weighted mean of `(theta_j - truth_j)^2`.
pub fn population_mse(pop: &ParticlePopulation, truth: &[f64]) -> Result<Vec<f64>> {
    check_dim("truth", pop.n_params(), truth.len())?;
    let total: f64 = pop.particles().iter().map(|p| p.weight).sum();
    let mut out = alloc::vec![0.0; truth.len()];
    for p in pop.particles() {
        for ((acc, x), t) in out.iter_mut().zip(&p.theta).zip(truth) {
            *acc += p.weight * (x - t) * (x - t);
        }
    }
    out.iter_mut().for_each(|v| *v /= total);
    Ok(out)
}

pub fn mse_vs_truth(record: &RunRecord, truth: &[f64]) -> Result<MseSeries> {
    let mut series = MseSeries {
        simulations: Vec::with_capacity(record.iterations.len()),
        mse: Vec::with_capacity(record.iterations.len()),
    };
    for it in &record.iterations {
        series.simulations.push(it.cumulative_simulations);
        series.mse.push(population_mse(&it.population, truth)?);
    }
    Ok(series)
}

/// Weighted posterior mean and (biased) sd of one parameter.
#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct MarginalSummary {
    pub mean: f64,
    pub sd: f64,
}

pub fn population_summary(pop: &ParticlePopulation) -> Vec<MarginalSummary> {
    let total: f64 = pop.particles().iter().map(|p| p.weight).sum();
    (0..pop.n_params())
        .map(|j| {
            let mean = pop.particles().iter().map(|p| p.weight * p.theta[j]).sum::<f64>() / total;
            let var = pop
                .particles()
                .iter()
                .map(|p| p.weight * (p.theta[j] - mean) * (p.theta[j] - mean))
                .sum::<f64>()
                / total;
            MarginalSummary {
                mean,
                sd: libm::sqrt(var),
            }
        })
        .collect()
}

/// Marginal summaries of the final population.
pub fn posterior_summary(record: &RunRecord) -> Result<Vec<MarginalSummary>> {
    let pop = record.final_population().ok_or(Error::Empty("run record"))?;
    Ok(population_summary(pop))
}

/// Root of the mean over datasets of the final-iteration MSE, per parameter.
pub fn rmse_over_datasets(runs: &[(&RunRecord, &[f64])]) -> Result<Vec<f64>> {
    let (first, _) = runs.first().ok_or(Error::Empty("dataset list"))?;
    let mut acc: Vec<f64> = Vec::new();
    for (record, truth) in runs {
        if record.model != first.model {
            return Err(Error::InvalidArgument("records come from different models".into()));
        }
        let pop = record.final_population().ok_or(Error::Empty("run record"))?;
        let mse = population_mse(pop, truth)?;
        if acc.is_empty() {
            acc = mse;
        } else {
            check_dim("parameters", acc.len(), mse.len())?;
            acc.iter_mut().zip(mse).for_each(|(a, m)| *a += m);
        }
    }
    let n = runs.len() as f64;
    Ok(acc.into_iter().map(|v| libm::sqrt(v / n)).collect())
}

/// Distance weights per iteration, rescaled to sum to one.
#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct WeightTrajectory {
    pub iterations: Vec<usize>,
    pub weights: Vec<Vec<f64>>,
}

pub fn weight_trajectory(record: &RunRecord) -> WeightTrajectory {
    let mut out = WeightTrajectory {
        iterations: Vec::new(),
        weights: Vec::new(),
    };
    for it in &record.iterations {
        if let Some(w) = it.weights() {
            let total: f64 = w.iter().sum();
            out.iterations.push(it.iteration);
            out.weights.push(w.iter().map(|v| v / total).collect());
        }
    }
    out
}

/// One row of the long-format diagnostics table.
#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct TidyRow {
    pub algorithm: String,
    pub dataset: usize,
    pub iteration: usize,
    /// Parameter (or summary, for distance weights) index; `None` for
    /// iteration-level quantities.
    pub parameter: Option<usize>,
    pub metric: &'static str,
    #[cfg_attr(feature = "serde", serde(with = "crate::serde_f64"))]
    pub value: f64,
}

/// Per-iteration diagnostics in long format. `truth` adds MSE rows.
pub fn tidy_rows(record: &RunRecord, dataset: usize, truth: Option<&[f64]>) -> Result<Vec<TidyRow>> {
    let algorithm = String::from(record.algorithm.id());
    let mut rows = Vec::new();
    let mut push = |iteration, parameter, metric, value| {
        rows.push(TidyRow {
            algorithm: algorithm.clone(),
            dataset,
            iteration,
            parameter,
            metric,
            value,
        })
    };
    for it in &record.iterations {
        let t = it.iteration;
        push(t, None, "simulations", it.cumulative_simulations as f64);
        push(t, None, "threshold", it.threshold());
        push(t, None, "weight_ratio", it.importance_weight_ratio);
        if let Some(e) = it.eccentricity {
            push(t, None, "eccentricity", e);
        }
        if let Some(truth) = truth {
            for (j, v) in population_mse(&it.population, truth)?.into_iter().enumerate() {
                push(t, Some(j), "mse", v);
            }
        }
        for (j, m) in population_summary(&it.population).into_iter().enumerate() {
            push(t, Some(j), "mean", m.mean);
            push(t, Some(j), "sd", m.sd);
        }
        if let Some(w) = it.weights() {
            let total: f64 = w.iter().sum();
            for (i, v) in w.iter().enumerate() {
                push(t, Some(i), "distance_weight", v / total);
            }
        }
    }
    Ok(rows)
}
