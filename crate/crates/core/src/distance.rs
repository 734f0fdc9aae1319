//! Weighted Euclidean distances and nested acceptance rules.

use alloc::vec::Vec;

use crate::error::{check_dim, Error, Result};

/// Weighted Euclidean distance `sqrt(sum_i (w_i x_i - w_i y_i)^2)`.
#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct DistanceFunction {
    weights: Vec<f64>,
}

impl DistanceFunction {
    pub fn new(weights: Vec<f64>) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::Empty("distance weights"));
        }
        if weights.iter().any(|w| !w.is_finite() || *w < 0.0) {
            return Err(Error::InvalidArgument(
                "distance weights must be finite and non-negative".into(),
            ));
        }
        if !weights.iter().any(|w| *w > 0.0) {
            return Err(Error::ZeroWeights);
        }
        Ok(Self { weights })
    }

    /// Unit weights: plain Euclidean distance.
    pub fn euclidean(dim: usize) -> Self {
        Self {
            weights: alloc::vec![1.0; dim],
        }
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn dim(&self) -> usize {
        self.weights.len()
    }

    /// Distance without validation. Callers guarantee matching dimensions.
    #[inline]
    pub fn eval(&self, x: &[f64], y: &[f64]) -> f64 {
        let mut acc = 0.0;
        for ((w, a), b) in self.weights.iter().zip(x).zip(y) {
            let d = w * a - w * b;
            acc += d * d;
        }
        libm::sqrt(acc)
    }

    /// Weights divided by their sum.
    pub fn normalized_weights(&self) -> Vec<f64> {
        let total: f64 = self.weights.iter().sum();
        self.weights.iter().map(|w| w / total).collect()
    }
}

/// Checked weighted Euclidean distance between two summary vectors.
pub fn weighted_euclidean(x: &[f64], y: &[f64], d: &DistanceFunction) -> Result<f64> {
    check_dim("distance lhs", d.dim(), x.len())?;
    check_dim("distance rhs", d.dim(), y.len())?;
    if x.iter().chain(y).any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("summary vector"));
    }
    Ok(d.eval(x, y))
}

/// A distance built from scale estimates, with the indices of summaries whose
/// scale was zero (and therefore got weight zero).
#[derive(Clone, Debug, PartialEq)]
pub struct ScaledDistance {
    pub distance: DistanceFunction,
    pub zero_scale: Vec<usize>,
}

/// `w_i = 1 / sigma_i`, with zero scales mapped to zero weight.
pub fn weights_from_scales(scales: &[f64]) -> Result<ScaledDistance> {
    if scales.is_empty() {
        return Err(Error::Empty("scales"));
    }
    if scales.iter().any(|s| !s.is_finite() || *s < 0.0) {
        return Err(Error::InvalidArgument("scales must be finite and non-negative".into()));
    }
    let mut zero_scale = Vec::new();
    let weights: Vec<f64> = scales
        .iter()
        .enumerate()
        .map(|(i, s)| {
            if *s > 0.0 {
                1.0 / s
            } else {
                zero_scale.push(i);
                0.0
            }
        })
        .collect();
    if zero_scale.len() == scales.len() {
        return Err(Error::ZeroScales);
    }
    if !zero_scale.is_empty() {
        log::warn!("summaries {zero_scale:?} have zero scale; their distance weight is 0");
    }
    Ok(ScaledDistance {
        distance: DistanceFunction { weights },
        zero_scale,
    })
}

/// Ratio of the largest to the smallest positive weight. Zero weights are
/// left out of the ratio.
pub fn eccentricity_ratio(d: &DistanceFunction) -> Result<f64> {
    let mut max = 0.0f64;
    let mut min = f64::INFINITY;
    for w in d.weights.iter().filter(|w| **w > 0.0) {
        max = max.max(*w);
        min = min.min(*w);
    }
    if max == 0.0 {
        return Err(Error::ZeroWeights);
    }
    Ok(max / min)
}

/// `w_i + delta * max_j w_j` for every weight.
pub fn regularize_weights(d: &DistanceFunction, delta: f64) -> Result<DistanceFunction> {
    if !(delta > 0.0 && delta.is_finite()) {
        return Err(Error::InvalidArgument(alloc::format!(
            "regularization delta must be positive, got {delta}"
        )));
    }
    let max = d.weights.iter().copied().fold(0.0, f64::max);
    let shift = delta * max;
    let top = max + shift;
    // Rounding can push max/min an ulp past (1 + delta) / delta; raise the
    // floor until the bound holds in floating point too.
    let bound = (1.0 + delta) / delta;
    let mut floor = top / bound;
    while top / floor > bound {
        floor = floor.next_up();
    }
    Ok(DistanceFunction {
        weights: d.weights.iter().map(|w| (w + shift).max(floor)).collect(),
    })
}

/// One `(distance, threshold)` stage of an acceptance rule.
#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Stage {
    pub distance: DistanceFunction,
    /// `f64::INFINITY` accepts everything.
    #[cfg_attr(feature = "serde", serde(with = "crate::serde_f64"))]
    pub threshold: f64,
}

impl Stage {
    pub fn new(distance: DistanceFunction, threshold: f64) -> Result<Self> {
        if threshold.is_nan() || threshold < 0.0 {
            return Err(Error::InvalidArgument(alloc::format!(
                "threshold must be non-negative, got {threshold}"
            )));
        }
        Ok(Self {
            distance,
            threshold,
        })
    }

    #[inline]
    pub fn passes(&self, s: &[f64], s_obs: &[f64]) -> bool {
        self.distance.eval(s, s_obs) <= self.threshold
    }
}

/// Conjunction of stages: a summary is accepted iff it passes every stage.
#[derive(Clone, Debug, Default, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct NestedAcceptanceRule {
    stages: Vec<Stage>,
}

impl NestedAcceptanceRule {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_stages(stages: Vec<Stage>) -> Result<Self> {
        let mut rule = Self::new();
        for s in stages {
            rule.push(s)?;
        }
        Ok(rule)
    }

    pub fn push(&mut self, stage: Stage) -> Result<()> {
        if let Some(first) = self.stages.first() {
            check_dim("acceptance stage", first.distance.dim(), stage.distance.dim())?;
        }
        self.stages.push(stage);
        Ok(())
    }

    pub fn stages(&self) -> &[Stage] {
        &self.stages
    }

    pub fn is_empty(&self) -> bool {
        self.stages.is_empty()
    }

    pub fn last(&self) -> Option<&Stage> {
        self.stages.last()
    }

    /// Unchecked acceptance test for hot loops.
    #[inline]
    pub fn passes(&self, s: &[f64], s_obs: &[f64]) -> bool {
        self.stages.iter().all(|stage| stage.passes(s, s_obs))
    }
}

/// Checked acceptance test. An empty rule accepts everything.
pub fn accept(s: &[f64], s_obs: &[f64], rule: &NestedAcceptanceRule) -> Result<bool> {
    if let Some(first) = rule.stages.first() {
        check_dim("summary", first.distance.dim(), s.len())?;
        check_dim("observed summary", first.distance.dim(), s_obs.len())?;
    } else {
        check_dim("observed summary", s.len(), s_obs.len())?;
    }
    Ok(rule.passes(s, s_obs))
}
