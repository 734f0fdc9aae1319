//! Experiment configuration: strict JSON, validated before anything runs.

use std::path::{Path, PathBuf};

use adaptive_abc_core::algorithms::{RunConfig, DEFAULT_SCALE_STORE_CAP};
use adaptive_abc_core::models::{
    Benchmark, GkModel, LotkaVolterraModel, NormalToyModel,
};
use adaptive_abc_core::{Algorithm, SimulationModel};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, Result};

/// Environment variable naming the default output root.
pub const OUTPUT_ENV: &str = "ADAPTIVE_ABC_OUTPUT";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub model: ModelSpec,
    pub algorithms: Vec<String>,
    pub population_size: usize,
    pub alpha: f64,
    pub budget: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scale_store_cap: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta: Option<f64>,
    pub seed: u64,
    pub dataset: DatasetSpec,
    #[serde(default)]
    pub shared_tuning: bool,
    /// Independent repeats of every (dataset, algorithm) pair with seeds
    /// `seed, seed + 1, ...`.
    #[serde(default = "one")]
    pub replicates: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_dir: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pmc: Option<PmcSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rejection: Option<RejectionSpec>,
}

fn one() -> u64 {
    1
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "id", rename_all = "kebab-case", deny_unknown_fields)]
pub enum ModelSpec {
    Normal {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        prior_sd: Option<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        s1_sd: Option<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        s2_sd: Option<f64>,
    },
    Gk {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        c: Option<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        order_indices: Option<Vec<usize>>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        dataset_size: Option<usize>,
    },
    LotkaVolterra {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        x1_0: Option<u64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        x2_0: Option<u64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        obs_times: Option<Vec<f64>>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        obs_noise_sd: Option<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        transition_cap: Option<u64>,
    },
}

/// Exactly one of the three sources must be given.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DatasetSpec {
    /// Simulate one dataset at these parameters.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub truth: Option<Vec<f64>>,
    /// Simulate `count` datasets at parameters drawn from the prior.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub prior_predictive: Option<PriorPredictive>,
    /// JSON file with `{"summaries": [...], "truth": [...]?}`, relative to
    /// the config file.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub observed_file: Option<PathBuf>,
    /// Seed for simulating datasets; defaults to the run seed.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PriorPredictive {
    pub count: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PmcSpec {
    /// Fixed thresholds `h_1, h_2, ...` instead of quantile thresholds;
    /// `"inf"` encodes an infinite threshold.
    #[serde(with = "adaptive_abc_core::serde_f64::vec")]
    pub schedule: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RejectionSpec {
    #[serde(
        default,
        skip_serializing_if = "Option::is_none",
        with = "adaptive_abc_core::serde_f64::option"
    )]
    pub threshold: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub top_k: Option<usize>,
    #[serde(default)]
    pub distance: RejectionDistanceSpec,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RejectionDistanceSpec {
    #[default]
    Mad,
    Euclidean,
}

/// A stored observation.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ObservedFile {
    pub summaries: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub truth: Option<Vec<f64>>,
}

impl ModelSpec {
    pub fn id(&self) -> &'static str {
        match self {
            ModelSpec::Normal { .. } => "normal",
            ModelSpec::Gk { .. } => "gk",
            ModelSpec::LotkaVolterra { .. } => "lotka-volterra",
        }
    }

    pub fn build(&self) -> std::result::Result<Benchmark, String> {
        Ok(match self {
            ModelSpec::Normal { prior_sd, s1_sd, s2_sd } => {
                let d = NormalToyModel::default();
                let m = NormalToyModel {
                    prior_sd: prior_sd.unwrap_or(d.prior_sd),
                    s1_sd: s1_sd.unwrap_or(d.s1_sd),
                    s2_sd: s2_sd.unwrap_or(d.s2_sd),
                };
                if [m.prior_sd, m.s1_sd, m.s2_sd].iter().any(|v| !(*v > 0.0 && v.is_finite())) {
                    return Err("normal model standard deviations must be positive".into());
                }
                Benchmark::Normal(m)
            }
            ModelSpec::Gk { c, order_indices, dataset_size } => {
                let d = GkModel::default();
                let size = dataset_size.unwrap_or(d.dataset_size);
                let indices = order_indices.clone().unwrap_or(d.order_indices);
                let c = c.unwrap_or(d.c);
                Benchmark::Gk(GkModel::new(c, indices, size).map_err(|e| e.to_string())?)
            }
            ModelSpec::LotkaVolterra { x1_0, x2_0, obs_times, obs_noise_sd, transition_cap } => {
                let d = LotkaVolterraModel::default();
                let m = LotkaVolterraModel {
                    x1_0: x1_0.unwrap_or(d.x1_0),
                    x2_0: x2_0.unwrap_or(d.x2_0),
                    obs_times: obs_times.clone().unwrap_or(d.obs_times),
                    obs_noise_sd: obs_noise_sd.unwrap_or(d.obs_noise_sd),
                    transition_cap: transition_cap.unwrap_or(d.transition_cap),
                    prior: d.prior,
                };
                let increasing = m.obs_times.windows(2).all(|w| w[0] < w[1]);
                if m.obs_times.is_empty() || !increasing || m.obs_times[0] < 0.0 {
                    return Err("obs_times must be non-empty, non-negative and increasing".into());
                }
                if !(m.obs_noise_sd >= 0.0 && m.obs_noise_sd.is_finite()) || m.transition_cap == 0 {
                    return Err("obs_noise_sd must be >= 0 and transition_cap positive".into());
                }
                Benchmark::LotkaVolterra(m)
            }
        })
    }
}

impl ExperimentConfig {
    /// Core run configuration for one replicate.
    pub fn run_config(&self, seed: u64) -> RunConfig {
        let mut c = RunConfig::new(self.population_size, self.alpha, self.budget, seed)
            .with_scale_store_cap(self.scale_store_cap.unwrap_or(DEFAULT_SCALE_STORE_CAP));
        c.delta = self.delta;
        c
    }

    pub fn algorithm_list(&self) -> Vec<Algorithm> {
        self.algorithms.iter().filter_map(|a| Algorithm::from_id(a)).collect()
    }
}

/// Algorithms the runner accepts.
pub const ALGORITHMS: [Algorithm; 4] = [
    Algorithm::Rejection,
    Algorithm::Pmc,
    Algorithm::PmcAdaptPrev,
    Algorithm::PmcAdaptCurr,
];

/// 1-based line of the first occurrence of `"key"` in the source, if any.
fn line_of(source: &str, key: &str) -> Option<usize> {
    let needle = format!("\"{key}\"");
    source.lines().position(|l| l.contains(&needle)).map(|i| i + 1)
}

fn at(source: &str, key: &str, message: impl AsRef<str>) -> String {
    match line_of(source, key) {
        Some(line) => format!("line {line}: {}", message.as_ref()),
        None => message.as_ref().to_string(),
    }
}

/// Parses and fully validates a configuration without running it. Relative
/// paths are resolved against `base`.
pub fn parse_config(source: &str, base: &Path) -> Result<ExperimentConfig> {
    let mut cfg: ExperimentConfig = serde_json::from_str(source).map_err(|e| {
        CliError::Config(vec![format!("line {}, column {}: {e}", e.line(), e.column())])
    })?;
    let mut errors = Vec::new();

    let model = match cfg.model.build() {
        Ok(m) => Some(m),
        Err(e) => {
            errors.push(at(source, "model", e));
            None
        }
    };
    if cfg.algorithms.is_empty() {
        errors.push(at(source, "algorithms", "at least one algorithm is required"));
    }
    for a in &cfg.algorithms {
        if !ALGORITHMS.iter().any(|x| x.id() == a) {
            let ids: Vec<&str> = ALGORITHMS.iter().map(|x| x.id()).collect();
            errors.push(at(source, "algorithms", format!("unknown algorithm \"{a}\" (expected one of {ids:?})")));
        }
    }
    if cfg.population_size == 0 {
        errors.push(at(source, "population_size", "population_size must be positive"));
    }
    if !(cfg.alpha > 0.0 && cfg.alpha < 1.0) {
        errors.push(at(
            source,
            "alpha",
            format!("alpha = {} violates 0 < alpha < 1 (alpha < 1 is required so thresholds shrink)", cfg.alpha),
        ));
    }
    if cfg.budget < cfg.population_size as u64 {
        errors.push(at(
            source,
            "budget",
            format!("budget {} is smaller than population_size {}", cfg.budget, cfg.population_size),
        ));
    }
    if cfg.scale_store_cap == Some(0) {
        errors.push(at(source, "scale_store_cap", "scale_store_cap must be positive"));
    }
    if let Some(d) = cfg.delta {
        if !(d > 0.0 && d.is_finite()) {
            errors.push(at(source, "delta", format!("delta must be positive, got {d}")));
        }
    }
    if cfg.replicates == 0 {
        errors.push(at(source, "replicates", "replicates must be at least 1"));
    }

    let ds = &mut cfg.dataset;
    let given = [ds.truth.is_some(), ds.prior_predictive.is_some(), ds.observed_file.is_some()]
        .iter()
        .filter(|b| **b)
        .count();
    if given != 1 {
        errors.push(at(
            source,
            "dataset",
            format!("dataset needs exactly one of truth, prior_predictive, observed_file; {given} given"),
        ));
    }
    if let Some(pp) = &ds.prior_predictive {
        if pp.count == 0 {
            errors.push(at(source, "prior_predictive", "prior_predictive.count must be positive"));
        }
    }
    if let Some(path) = ds.observed_file.as_mut() {
        if path.is_relative() {
            *path = base.join(&*path);
        }
    }
    if let Some(model) = &model {
        if let Some(t) = &ds.truth {
            if t.len() != model.n_params() {
                errors.push(at(
                    source,
                    "truth",
                    format!("truth has {} values but {} has {} parameters", t.len(), model.name(), model.n_params()),
                ));
            } else if !(model.prior_density(t) > 0.0) {
                errors.push(at(source, "truth", "truth lies outside the prior support"));
            }
        }
        if let Some(path) = &ds.observed_file {
            match read_observed(path) {
                Ok(obs) if obs.summaries.len() != model.n_summaries() => errors.push(at(
                    source,
                    "observed_file",
                    format!("{} has {} summaries, model expects {}", path.display(), obs.summaries.len(), model.n_summaries()),
                )),
                Ok(_) => {}
                Err(e) => errors.push(at(source, "observed_file", e.to_string())),
            }
        }
    }

    if let Some(p) = &cfg.pmc {
        if p.schedule.is_empty() || p.schedule.iter().any(|h| h.is_nan() || *h < 0.0) {
            errors.push(at(source, "schedule", "pmc.schedule must be a non-empty list of thresholds >= 0"));
        } else if p.schedule[0] != f64::INFINITY {
            errors.push(at(source, "schedule", "pmc.schedule must start with \"inf\": the first distance is MAD-scaled"));
        }
        if cfg.shared_tuning && cfg.algorithms.iter().any(|a| a == "pmc") {
            errors.push(at(source, "pmc", "a fixed pmc schedule cannot be combined with shared_tuning"));
        }
    }
    if let Some(r) = &cfg.rejection {
        match (r.threshold, r.top_k) {
            (Some(_), Some(_)) => errors.push(at(source, "rejection", "give either rejection.threshold or rejection.top_k")),
            (Some(h), None) if h.is_nan() || h < 0.0 => errors.push(at(source, "threshold", "rejection.threshold must be >= 0")),
            (None, Some(k)) if k == 0 || k as u64 > cfg.budget => {
                errors.push(at(source, "top_k", format!("rejection.top_k must lie in 1..={}", cfg.budget)))
            }
            _ => {}
        }
    }
    if errors.is_empty() {
        Ok(cfg)
    } else {
        Err(CliError::Config(errors))
    }
}

/// Reads and validates a configuration file.
pub fn validate_config(path: &Path) -> Result<ExperimentConfig> {
    let source = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    let base = path.parent().unwrap_or(Path::new("."));
    parse_config(&source, base)
}

pub fn read_observed(path: &Path) -> Result<ObservedFile> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    let obs: ObservedFile = serde_json::from_str(&text).map_err(|e| CliError::format(path, e))?;
    if obs.summaries.iter().any(|v| !v.is_finite()) {
        return Err(CliError::format(path, "observed summaries must be finite"));
    }
    Ok(obs)
}

/// Output directory: the configured one, or `$ADAPTIVE_ABC_OUTPUT/<name>`.
pub fn resolve_output_dir(cfg: &ExperimentConfig, base: &Path, name: &str) -> Result<PathBuf> {
    match &cfg.output_dir {
        Some(p) if p.is_relative() => Ok(base.join(p)),
        Some(p) => Ok(p.clone()),
        None => match std::env::var_os(OUTPUT_ENV) {
            Some(root) => Ok(PathBuf::from(root).join(name)),
            None => Err(CliError::Config(vec![format!(
                "no output_dir in the config and {OUTPUT_ENV} is not set"
            )])),
        },
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const LV: &str = r#"{
  "model": {"id": "lotka-volterra"},
  "algorithms": ["pmc", "pmc-adapt-prev", "pmc-adapt-curr"],
  "population_size": 200,
  "alpha": 0.5,
  "budget": 50000,
  "seed": 1,
  "dataset": {"truth": [0.0, -5.298317366548036, -0.5108256237659907]},
  "shared_tuning": true,
  "output_dir": "out"
}"#;

    fn errors(src: &str) -> Vec<String> {
        match parse_config(src, Path::new(".")) {
            Err(CliError::Config(e)) => e,
            other => panic!("expected config error, got {other:?}"),
        }
    }

    #[test]
    fn lv_config_is_valid() {
        let cfg = parse_config(LV, Path::new(".")).unwrap();
        assert_eq!(cfg.model.id(), "lotka-volterra");
        assert_eq!(cfg.replicates, 1);
    }

    #[test]
    fn alpha_one_names_the_constraint() {
        let e = errors(&LV.replace("\"alpha\": 0.5", "\"alpha\": 1.0"));
        assert_eq!(e.len(), 1);
        assert!(e[0].starts_with("line 5:"), "{}", e[0]);
        assert!(e[0].contains("alpha < 1"));
    }

    #[test]
    fn missing_dataset_spec() {
        let src = LV.replace(
            "\"dataset\": {\"truth\": [0.0, -5.298317366548036, -0.5108256237659907]}",
            "\"dataset\": {}",
        );
        assert!(errors(&src)[0].contains("exactly one of"));
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let e = errors(&LV.replace("\"seed\": 1", "\"sed\": 1"));
        assert!(e[0].contains("unknown field"), "{}", e[0]);
        assert!(e[0].starts_with("line "));
        let e = errors(&LV.replace("{\"id\": \"lotka-volterra\"}", "{\"id\": \"lotka-volterra\", \"x3_0\": 1}"));
        assert!(e[0].contains("unknown field"), "{}", e[0]);
    }

    #[test]
    fn semantic_errors_accumulate() {
        let src = LV
            .replace("\"budget\": 50000", "\"budget\": 100")
            .replace("\"pmc\",", "\"abc\",");
        let e = errors(&src);
        assert_eq!(e.len(), 2, "{e:?}");
        assert!(e.iter().any(|m| m.contains("budget 100")));
        assert!(e.iter().any(|m| m.contains("unknown algorithm \"abc\"")));
    }

    #[test]
    fn truth_dimension_and_support() {
        assert!(errors(&LV.replace("[0.0, -5.298317366548036, -0.5108256237659907]", "[0.0, 1.0]"))[0]
            .contains("3 parameters"));
        assert!(errors(&LV.replace("[0.0, -5.298317366548036, -0.5108256237659907]", "[0.0, 3.0, 1.0]"))[0]
            .contains("prior support"));
    }
}
