//! The g-and-k distribution, summarised by a subset of order statistics.

use alloc::vec::Vec;

use rand_distr::{Beta, Distribution};

use super::UniformBox;
use crate::error::{Error, Result};
use crate::model::{Simulation, SimulationModel};
use crate::rng::RngStream;
use crate::stats::normal_quantile;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GkParams {
    pub a: f64,
    pub b: f64,
    pub g: f64,
    pub k: f64,
}

impl GkParams {
    pub fn from_slice(theta: &[f64]) -> Self {
        Self {
            a: theta[0],
            b: theta[1],
            g: theta[2],
            k: theta[3],
        }
    }
}

/// `A + B [1 + c tanh(g z / 2)] (1 + z^2)^k z` with `z` the standard normal
/// quantile of `x`. `tanh(gz/2)` equals `(1 - e^{-gz}) / (1 + e^{-gz})`.
pub fn gk_quantile(x: f64, p: GkParams, c: f64) -> Result<f64> {
    let z = normal_quantile(x)?;
    Ok(quantile_at_z(z, p, c))
}

#[inline]
fn quantile_at_z(z: f64, p: GkParams, c: f64) -> f64 {
    let skew = 1.0 + c * libm::tanh(0.5 * p.g * z);
    p.a + p.b * skew * libm::pow(1.0 + z * z, p.k) * z
}

#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct GkModel {
    pub c: f64,
    /// 1-based order-statistic indices, strictly increasing.
    pub order_indices: Vec<usize>,
    pub dataset_size: usize,
    pub prior: UniformBox,
}

impl Default for GkModel {
    fn default() -> Self {
        Self {
            c: 0.8,
            order_indices: (1..=7).map(|i| 1250 * i).collect(),
            dataset_size: 10_000,
            prior: UniformBox {
                lower: 0.0,
                upper: 10.0,
                dim: 4,
            },
        }
    }
}

impl GkModel {
    pub fn new(c: f64, order_indices: Vec<usize>, dataset_size: usize) -> Result<Self> {
        let increasing = order_indices.windows(2).all(|w| w[0] < w[1]);
        let in_range = order_indices.iter().all(|i| *i >= 1 && *i <= dataset_size);
        if order_indices.is_empty() || !increasing || !in_range {
            return Err(Error::InvalidArgument(alloc::format!(
                "order indices must be strictly increasing within 1..={dataset_size}"
            )));
        }
        Ok(Self {
            c,
            order_indices,
            dataset_size,
            ..Self::default()
        })
    }

    /// Jointly samples the uniform order statistics at `order_indices` of a
    /// sample of size `dataset_size`, by sequential beta spacings:
    /// `U_(i1) ~ Beta(i1, n + 1 - i1)` and, given `U_(i_j) = u`,
    /// `U_(i_{j+1}) = u + (1 - u) Beta(i_{j+1} - i_j, n + 1 - i_{j+1})`.
    pub fn sample_uniform_order_stats(&self, rng: &mut RngStream) -> Vec<f64> {
        let n = self.dataset_size as f64;
        let mut prev_index = 0usize;
        let mut u = 0.0;
        self.order_indices
            .iter()
            .map(|&i| {
                let gap = (i - prev_index) as f64;
                let rest = n + 1.0 - i as f64;
                let spacing: f64 = Beta::new(gap, rest)
                    .expect("positive beta parameters")
                    .sample(rng);
                u += (1.0 - u) * spacing;
                prev_index = i;
                u
            })
            .collect()
    }
}

/// Order-statistic summaries at `params`.
pub fn gk_simulate_order_stats(params: GkParams, model: &GkModel, rng: &mut RngStream) -> Vec<f64> {
    model
        .sample_uniform_order_stats(rng)
        .into_iter()
        .map(|u| {
            let u = u.clamp(f64::MIN_POSITIVE, 1.0 - f64::EPSILON / 2.0);
            gk_quantile(u, params, model.c).expect("u clamped into (0, 1)")
        })
        .collect()
}

impl SimulationModel for GkModel {
    fn name(&self) -> &str {
        "gk"
    }

    fn n_params(&self) -> usize {
        4
    }

    fn n_summaries(&self) -> usize {
        self.order_indices.len()
    }

    fn sample_prior(&self, rng: &mut RngStream) -> Vec<f64> {
        self.prior.sample(rng)
    }

    fn prior_density(&self, theta: &[f64]) -> f64 {
        self.prior.density(theta)
    }

    fn simulate(&self, theta: &[f64], rng: &mut RngStream) -> Simulation {
        Simulation::Complete(gk_simulate_order_stats(GkParams::from_slice(theta), self, rng))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn median_maps_to_location() {
        let p = GkParams { a: 3.0, b: 1.0, g: 1.5, k: 0.5 };
        assert_eq!(gk_quantile(0.5, p, 0.8).unwrap(), 3.0);
    }

    #[test]
    fn reduces_to_normal_quantile() {
        let p = GkParams { a: 0.0, b: 1.0, g: 0.0, k: 0.0 };
        let v = gk_quantile(0.975, p, 0.8).unwrap();
        assert!((v - 1.959_963_984_540_054).abs() < 1e-9);
    }

    #[test]
    fn rejects_out_of_range() {
        let p = GkParams { a: 0.0, b: 1.0, g: 0.0, k: 0.0 };
        assert!(gk_quantile(0.0, p, 0.8).is_err());
        assert!(gk_quantile(1.0, p, 0.8).is_err());
    }

    #[test]
    fn invalid_indices() {
        assert!(GkModel::new(0.8, alloc::vec![5, 5], 20).is_err());
        assert!(GkModel::new(0.8, alloc::vec![0, 5], 20).is_err());
        assert!(GkModel::new(0.8, alloc::vec![5, 21], 20).is_err());
        assert!(GkModel::new(0.8, alloc::vec![5, 10, 15], 20).is_ok());
    }
}
