//! File formats: JSON manifests and records, CSV tables.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use adaptive_abc_core::diagnostics::{rmse_over_datasets, tidy_rows};
use adaptive_abc_core::{Algorithm, RunRecord, Termination};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::config::ExperimentConfig;
use crate::error::{CliError, Result};

pub const MANIFEST: &str = "manifest.json";
pub const DATASETS: &str = "datasets.json";
pub const RECORD: &str = "record.json";
pub const POPULATION: &str = "population.csv";
pub const WEIGHTS: &str = "weights.csv";
pub const DIAGNOSTICS: &str = "diagnostics.csv";
pub const RMSE: &str = "rmse.csv";
pub const REGIONS: &str = "regions.csv";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub version: String,
    pub workers: usize,
    pub model: String,
    pub config: ExperimentConfig,
    pub runs: Vec<RunEntry>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunEntry {
    pub algorithm: Algorithm,
    pub dataset: usize,
    pub replicate: u64,
    pub seed: u64,
    /// Directory of the run, relative to the campaign directory.
    pub dir: String,
    pub termination: Termination,
    pub iterations: usize,
    pub simulations_used: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DatasetEntry {
    pub index: usize,
    pub source: String,
    pub summaries: Vec<f64>,
    pub truth: Option<Vec<f64>>,
    pub seed: Option<u64>,
    /// Incomplete simulations discarded while generating the dataset.
    pub retries: Option<u64>,
}

pub fn create_dir(path: &Path) -> Result<()> {
    std::fs::create_dir_all(path).map_err(|e| CliError::io(path, e))
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let file = File::create(path).map_err(|e| CliError::io(path, e))?;
    let mut w = BufWriter::new(file);
    serde_json::to_writer_pretty(&mut w, value).map_err(|e| CliError::format(path, e))?;
    w.write_all(b"\n").and_then(|_| w.flush()).map_err(|e| CliError::io(path, e))
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| CliError::format(path, e))
}

fn csv_writer(path: &Path) -> Result<csv::Writer<File>> {
    csv::Writer::from_path(path).map_err(|e| csv_error(path, e))
}

fn csv_error(path: &Path, e: csv::Error) -> CliError {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => CliError::io(path, io),
        other => CliError::format(path, format!("{other:?}")),
    }
}

fn write_rows(path: &Path, header: Vec<String>, rows: impl Iterator<Item = Vec<String>>) -> Result<()> {
    let mut w = csv_writer(path)?;
    w.write_record(&header).map_err(|e| csv_error(path, e))?;
    for row in rows {
        w.write_record(&row).map_err(|e| csv_error(path, e))?;
    }
    w.flush().map_err(|e| CliError::io(path, e))
}

fn num(v: f64) -> String {
    // `Display` is the shortest string that parses back to the same value
    format!("{v}")
}

/// One row per particle of every iteration.
pub fn write_population(path: &Path, record: &RunRecord) -> Result<()> {
    let Some(first) = record.iterations.first() else {
        return write_rows(path, vec!["iteration".into(), "particle".into()], std::iter::empty());
    };
    let p0 = &first.population.particles()[0];
    let mut header = vec!["iteration".to_string(), "particle".to_string()];
    header.extend((0..p0.theta.len()).map(|j| format!("theta_{j}")));
    header.extend((0..p0.summary.len()).map(|i| format!("s_{i}")));
    header.extend(["weight".to_string(), "distance".to_string()]);
    let rows = record.iterations.iter().flat_map(|it| {
        it.population.particles().iter().enumerate().map(move |(k, p)| {
            let mut row = vec![it.iteration.to_string(), k.to_string()];
            row.extend(p.theta.iter().map(|v| num(*v)));
            row.extend(p.summary.iter().map(|v| num(*v)));
            row.push(num(p.weight));
            row.push(p.distance.map(num).unwrap_or_default());
            row
        })
    });
    write_rows(path, header, rows)
}

/// Distance weights (raw and rescaled to sum 1) and thresholds per iteration.
pub fn write_weights(path: &Path, record: &RunRecord) -> Result<()> {
    let header = ["iteration", "summary", "weight", "normalized_weight", "threshold", "next_threshold"]
        .map(String::from)
        .to_vec();
    let rows = record.iterations.iter().flat_map(|it| {
        let weights = it.weights().map(|w| w.to_vec()).unwrap_or_default();
        let total: f64 = weights.iter().sum();
        let next = it.next_stage.as_ref().map(|s| num(s.threshold)).unwrap_or_default();
        let h = num(it.threshold());
        weights.into_iter().enumerate().map(move |(i, w)| {
            vec![it.iteration.to_string(), i.to_string(), num(w), num(w / total), h.clone(), next.clone()]
        })
    });
    write_rows(path, header, rows)
}

/// A finished run together with where it came from.
pub struct LoadedRun {
    pub entry: RunEntry,
    pub record: RunRecord,
}

pub fn load_runs(dir: &Path) -> Result<(Manifest, Vec<DatasetEntry>, Vec<LoadedRun>)> {
    let manifest: Manifest = read_json(&dir.join(MANIFEST))?;
    let datasets: Vec<DatasetEntry> = read_json(&dir.join(DATASETS))?;
    let runs = manifest
        .runs
        .iter()
        .map(|entry| {
            let record = read_json(&dir.join(&entry.dir).join(RECORD))?;
            Ok(LoadedRun {
                entry: entry.clone(),
                record,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok((manifest, datasets, runs))
}

/// Long-format diagnostics and per-algorithm RMSE over datasets. Returns the
/// files written.
pub fn write_diagnostics(out: &Path, datasets: &[DatasetEntry], runs: &[LoadedRun]) -> Result<Vec<PathBuf>> {
    let truth_of = |i: usize| datasets.iter().find(|d| d.index == i).and_then(|d| d.truth.as_deref());
    let path = out.join(DIAGNOSTICS);
    let mut rows = Vec::new();
    for run in runs {
        let tidy = tidy_rows(&run.record, run.entry.dataset, truth_of(run.entry.dataset))?;
        rows.extend(tidy.into_iter().map(|r| {
            vec![
                r.algorithm,
                r.dataset.to_string(),
                run.entry.replicate.to_string(),
                r.iteration.to_string(),
                r.parameter.map(|p| p.to_string()).unwrap_or_default(),
                r.metric.to_string(),
                num(r.value),
            ]
        }));
    }
    let header = ["algorithm", "dataset", "replicate", "iteration", "parameter", "metric", "value"]
        .map(String::from)
        .to_vec();
    write_rows(&path, header, rows.into_iter())?;
    let mut written = vec![path];

    let mut algorithms: Vec<Algorithm> = Vec::new();
    for run in runs {
        if !algorithms.contains(&run.entry.algorithm) {
            algorithms.push(run.entry.algorithm);
        }
    }
    let mut rmse_rows = Vec::new();
    for alg in algorithms {
        let pairs: Vec<(&RunRecord, &[f64])> = runs
            .iter()
            .filter(|r| r.entry.algorithm == alg && !r.record.iterations.is_empty())
            .filter_map(|r| truth_of(r.entry.dataset).map(|t| (&r.record, t)))
            .collect();
        if pairs.is_empty() {
            continue;
        }
        for (j, v) in rmse_over_datasets(&pairs)?.into_iter().enumerate() {
            rmse_rows.push(vec![alg.id().to_string(), j.to_string(), num(v), pairs.len().to_string()]);
        }
    }
    if !rmse_rows.is_empty() {
        let path = out.join(RMSE);
        let header = ["algorithm", "parameter", "rmse", "runs"].map(String::from).to_vec();
        write_rows(&path, header, rmse_rows.into_iter())?;
        written.push(path);
    }
    Ok(written)
}

/// Acceptance regions per iteration: every stage of the rule the iteration
/// sampled under, as weights and a threshold around the observation. The
/// region is `{s : sum_i (w_i (s_i - obs_i))^2 <= h^2}` for every stage.
pub fn write_regions(path: &Path, runs: &[LoadedRun]) -> Result<()> {
    let header = ["algorithm", "dataset", "replicate", "iteration", "stage", "threshold", "summary", "weight", "observed"]
        .map(String::from)
        .to_vec();
    let mut rows = Vec::new();
    for run in runs {
        let r = &run.record;
        for (i, it) in r.iterations.iter().enumerate() {
            for (k, stage) in r.acceptance_rule(i).stages().iter().enumerate() {
                for (j, w) in stage.distance.weights().iter().enumerate() {
                    rows.push(vec![
                        r.algorithm.id().to_string(),
                        run.entry.dataset.to_string(),
                        run.entry.replicate.to_string(),
                        it.iteration.to_string(),
                        k.to_string(),
                        num(stage.threshold),
                        j.to_string(),
                        num(*w),
                        num(r.observed[j]),
                    ]);
                }
            }
        }
    }
    write_rows(path, header, rows.into_iter())
}
