//! Runs a campaign: datasets x replicates x algorithms.

use std::path::{Path, PathBuf};

use adaptive_abc_core::algorithms::{
    abc_pmc, abc_pmc_adapt_curr, abc_pmc_adapt_prev, abc_rejection, first_iteration_tuning,
    AdaptPrevOptions, PmcOptions, RejectionDistance, RejectionThreshold,
};
use adaptive_abc_core::distance::{DistanceFunction, Stage};
use adaptive_abc_core::models::{make_observed_dataset, Benchmark};
use adaptive_abc_core::rng::derive_seed;
use adaptive_abc_core::{Algorithm, Executor, RunRecord, Sequential, SimulationModel};

use crate::config::{read_observed, ExperimentConfig, RejectionDistanceSpec};
use crate::error::{CliError, Result};
use crate::executor::Rayon;
use crate::output::{
    create_dir, write_diagnostics, write_json, write_population, write_weights, DatasetEntry,
    LoadedRun, Manifest, RunEntry, DATASETS, MANIFEST, POPULATION, RECORD, WEIGHTS,
};

/// What a finished campaign produced.
#[derive(Debug)]
pub struct CampaignOutcome {
    pub output_dir: PathBuf,
    pub manifest: Manifest,
    /// Runs that ended before completing a single population.
    pub empty_runs: Vec<String>,
}

impl CampaignOutcome {
    /// 0 on success, 3 when some run never completed a population.
    pub fn exit_code(&self) -> i32 {
        if self.empty_runs.is_empty() {
            0
        } else {
            3
        }
    }
}

pub fn build_datasets(cfg: &ExperimentConfig, model: &Benchmark) -> Result<Vec<DatasetEntry>> {
    let ds = &cfg.dataset;
    let seed = ds.seed.unwrap_or(cfg.seed);
    if let Some(truth) = &ds.truth {
        let d = make_observed_dataset(model, Some(truth), seed)?;
        return Ok(vec![DatasetEntry {
            index: 0,
            source: "truth".into(),
            summaries: d.summaries,
            truth: Some(d.truth),
            seed: Some(seed),
            retries: Some(d.retries),
        }]);
    }
    if let Some(pp) = &ds.prior_predictive {
        return (0..pp.count)
            .map(|i| {
                let s = derive_seed(seed, i as u64);
                let d = make_observed_dataset(model, None, s)?;
                Ok(DatasetEntry {
                    index: i,
                    source: "prior-predictive".into(),
                    summaries: d.summaries,
                    truth: Some(d.truth),
                    seed: Some(s),
                    retries: Some(d.retries),
                })
            })
            .collect();
    }
    let path = ds.observed_file.as_ref().expect("validated dataset spec");
    let obs = read_observed(path)?;
    Ok(vec![DatasetEntry {
        index: 0,
        source: format!("file:{}", path.display()),
        summaries: obs.summaries,
        truth: obs.truth,
        seed: None,
        retries: None,
    }])
}

fn run_one<E: Executor>(
    cfg: &ExperimentConfig,
    model: &Benchmark,
    algorithm: Algorithm,
    observed: &[f64],
    seed: u64,
    tuning: Option<&Stage>,
    executor: &E,
) -> Result<RunRecord> {
    let run_cfg = cfg.run_config(seed);
    let record = match algorithm {
        Algorithm::Rejection => {
            let spec = cfg.rejection.clone();
            let threshold = match spec.as_ref().and_then(|r| r.threshold) {
                Some(h) => RejectionThreshold::Fixed(h),
                None => RejectionThreshold::TopK(
                    spec.as_ref().and_then(|r| r.top_k).unwrap_or(cfg.population_size),
                ),
            };
            let distance = match spec.map(|r| r.distance).unwrap_or_default() {
                RejectionDistanceSpec::Mad => RejectionDistance::Mad,
                RejectionDistanceSpec::Euclidean => {
                    RejectionDistance::Fixed(DistanceFunction::euclidean(model.n_summaries()))
                }
            };
            // every simulation in the budget is a prior draw
            let mut draws = run_cfg.clone();
            draws.population_size = cfg.budget as usize;
            abc_rejection(model, observed, &draws, threshold, &distance, executor)?.record
        }
        Algorithm::Pmc => {
            let options = match (&cfg.pmc, tuning) {
                (Some(p), _) => PmcOptions::adaptive().with_schedule(p.schedule.clone()),
                (None, Some(stage)) => PmcOptions::tuned(stage.distance.clone(), stage.threshold),
                (None, None) => PmcOptions::adaptive(),
            };
            abc_pmc(model, observed, &run_cfg, &options, executor)?
        }
        Algorithm::PmcAdaptPrev => {
            let options = AdaptPrevOptions {
                initial_stage: tuning.cloned(),
            };
            abc_pmc_adapt_prev(model, observed, &run_cfg, &options, executor)?
        }
        Algorithm::PmcAdaptCurr => abc_pmc_adapt_curr(model, observed, &run_cfg, executor)?,
        Algorithm::Importance => unreachable!("rejected by config validation"),
    };
    Ok(record)
}

fn run_campaign<E: Executor>(cfg: &ExperimentConfig, out: &Path, executor: &E) -> Result<CampaignOutcome> {
    let model = cfg.model.build().map_err(|e| CliError::Config(vec![e]))?;
    create_dir(out)?;
    let datasets = build_datasets(cfg, &model)?;
    write_json(&out.join(DATASETS), &datasets)?;

    let algorithms = cfg.algorithm_list();
    let wants_tuning = cfg.shared_tuning
        && algorithms
            .iter()
            .any(|a| matches!(a, Algorithm::PmcAdaptPrev) || (*a == Algorithm::Pmc && cfg.pmc.is_none()));
    let mut manifest = Manifest {
        version: env!("CARGO_PKG_VERSION").to_string(),
        workers: executor.workers(),
        model: model.name().to_string(),
        config: cfg.clone(),
        runs: Vec::new(),
    };
    let mut loaded = Vec::new();
    let mut empty_runs = Vec::new();
    for dataset in &datasets {
        for replicate in 0..cfg.replicates {
            let seed = cfg.seed + replicate;
            let tuning = if wants_tuning {
                first_iteration_tuning(&model, &dataset.summaries, &cfg.run_config(seed), executor)?
            } else {
                None
            };
            if wants_tuning && tuning.is_none() {
                log::warn!("shared tuning: the current-iteration run completed no iteration; tuning disabled");
            }
            for &algorithm in &algorithms {
                let record = run_one(cfg, &model, algorithm, &dataset.summaries, seed, tuning.as_ref(), executor)?;
                let dir = format!("runs/{}-d{:03}-r{:03}", algorithm.id(), dataset.index, replicate);
                let run_dir = out.join(&dir);
                create_dir(&run_dir)?;
                write_json(&run_dir.join(RECORD), &record)?;
                write_population(&run_dir.join(POPULATION), &record)?;
                write_weights(&run_dir.join(WEIGHTS), &record)?;
                if record.iterations.is_empty() && algorithm != Algorithm::Rejection {
                    empty_runs.push(dir.clone());
                }
                log::info!(
                    "{dir}: {} iterations, {} simulations ({:?})",
                    record.iterations.len(),
                    record.simulations_used,
                    record.termination
                );
                let entry = RunEntry {
                    algorithm,
                    dataset: dataset.index,
                    replicate,
                    seed,
                    dir,
                    termination: record.termination,
                    iterations: record.iterations.len(),
                    simulations_used: record.simulations_used,
                };
                manifest.runs.push(entry.clone());
                loaded.push(LoadedRun { entry, record });
            }
        }
    }
    write_diagnostics(out, &datasets, &loaded)?;
    write_json(&out.join(MANIFEST), &manifest)?;
    Ok(CampaignOutcome {
        output_dir: out.to_path_buf(),
        manifest,
        empty_runs,
    })
}

/// Runs a validated configuration, writing everything under `out`.
/// With one worker the run is strictly sequential.
pub fn run_experiment(cfg: &ExperimentConfig, out: &Path, workers: usize) -> Result<CampaignOutcome> {
    if workers <= 1 {
        run_campaign(cfg, out, &Sequential)
    } else {
        let pool = Rayon::new(workers).map_err(|e| CliError::Config(vec![format!("--workers {workers}: {e}")]))?;
        run_campaign(cfg, out, &pool)
    }
}

