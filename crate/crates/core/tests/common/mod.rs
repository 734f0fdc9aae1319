#![allow(dead_code)]

use std::sync::atomic::{AtomicU64, Ordering};

use adaptive_abc_core::rng::RngStream;
use adaptive_abc_core::{Simulation, SimulationModel};
use rand_distr::{Distribution, StandardNormal};

/// `theta ~ N(0, 1)`, `s ~ N(theta, 1)`.
pub struct ConjugateToy;

impl SimulationModel for ConjugateToy {
    fn name(&self) -> &str {
        "conjugate"
    }
    fn n_params(&self) -> usize {
        1
    }
    fn n_summaries(&self) -> usize {
        1
    }
    fn sample_prior(&self, rng: &mut RngStream) -> Vec<f64> {
        vec![StandardNormal.sample(rng)]
    }
    fn prior_density(&self, theta: &[f64]) -> f64 {
        (-0.5 * theta[0] * theta[0]).exp() / (2.0 * std::f64::consts::PI).sqrt()
    }
    fn simulate(&self, theta: &[f64], rng: &mut RngStream) -> Simulation {
        let z: f64 = StandardNormal.sample(rng);
        Simulation::Complete(vec![theta[0] + z])
    }
}

/// `theta ~ Unif(-1, 1)`, `s = theta`.
pub struct Identity;

impl SimulationModel for Identity {
    fn name(&self) -> &str {
        "identity"
    }
    fn n_params(&self) -> usize {
        1
    }
    fn n_summaries(&self) -> usize {
        1
    }
    fn sample_prior(&self, rng: &mut RngStream) -> Vec<f64> {
        vec![2.0 * rng.open01() - 1.0]
    }
    fn prior_density(&self, theta: &[f64]) -> f64 {
        if theta[0].abs() < 1.0 {
            0.5
        } else {
            0.0
        }
    }
    fn simulate(&self, theta: &[f64], _rng: &mut RngStream) -> Simulation {
        Simulation::Complete(vec![theta[0]])
    }
}

/// Counts `simulate` calls; every `incomplete_every`-th call is incomplete.
pub struct Counting<M> {
    pub inner: M,
    pub calls: AtomicU64,
    pub incomplete_every: u64,
}

impl<M> Counting<M> {
    pub fn new(inner: M) -> Self {
        Self {
            inner,
            calls: AtomicU64::new(0),
            incomplete_every: 0,
        }
    }

    pub fn calls(&self) -> u64 {
        self.calls.load(Ordering::SeqCst)
    }
}

impl<M: SimulationModel> SimulationModel for Counting<M> {
    fn name(&self) -> &str {
        self.inner.name()
    }
    fn n_params(&self) -> usize {
        self.inner.n_params()
    }
    fn n_summaries(&self) -> usize {
        self.inner.n_summaries()
    }
    fn sample_prior(&self, rng: &mut RngStream) -> Vec<f64> {
        self.inner.sample_prior(rng)
    }
    fn prior_density(&self, theta: &[f64]) -> f64 {
        self.inner.prior_density(theta)
    }
    fn simulate(&self, theta: &[f64], rng: &mut RngStream) -> Simulation {
        let call = self.calls.fetch_add(1, Ordering::SeqCst) + 1;
        let out = self.inner.simulate(theta, rng);
        if self.incomplete_every > 0 && call % self.incomplete_every == 0 {
            Simulation::Incomplete
        } else {
            out
        }
    }
}

/// One-sample Kolmogorov-Smirnov statistic.
pub fn ks_one_sample(mut xs: Vec<f64>, cdf: impl Fn(f64) -> f64) -> f64 {
    xs.sort_by(f64::total_cmp);
    let n = xs.len() as f64;
    xs.iter()
        .enumerate()
        .map(|(i, x)| {
            let f = cdf(*x);
            (f - i as f64 / n).abs().max(((i + 1) as f64 / n - f).abs())
        })
        .fold(0.0, f64::max)
}

/// Two-sample Kolmogorov-Smirnov statistic.
pub fn ks_two_sample(mut a: Vec<f64>, mut b: Vec<f64>) -> f64 {
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    let (n, m) = (a.len() as f64, b.len() as f64);
    let (mut i, mut j, mut d) = (0usize, 0usize, 0.0f64);
    while i < a.len() && j < b.len() {
        let x = a[i].min(b[j]);
        while i < a.len() && a[i] <= x {
            i += 1;
        }
        while j < b.len() && b[j] <= x {
            j += 1;
        }
        d = d.max((i as f64 / n - j as f64 / m).abs());
    }
    d
}

/// 1% critical values.
pub fn ks_critical_one(n: usize) -> f64 {
    1.628 / (n as f64).sqrt()
}

pub fn ks_critical_two(n: usize, m: usize) -> f64 {
    1.628 * ((n + m) as f64 / (n * m) as f64).sqrt()
}

/// KS distance between a weighted sample's ECDF and an unweighted sample's,
/// with the effective size `(sum w)^2 / sum w^2` of the weighted one.
pub fn ks_weighted(a: &[(f64, f64)], b: &[f64]) -> (f64, usize) {
    let mut a = a.to_vec();
    a.sort_by(|x, y| x.0.total_cmp(&y.0));
    let mut b = b.to_vec();
    b.sort_by(f64::total_cmp);
    let total: f64 = a.iter().map(|p| p.1).sum();
    let ess = total * total / a.iter().map(|p| p.1 * p.1).sum::<f64>();
    let points: Vec<f64> = a.iter().map(|p| p.0).chain(b.iter().copied()).collect();
    let mut d = 0.0f64;
    for x in points {
        let fa = a.iter().take_while(|p| p.0 <= x).map(|p| p.1).sum::<f64>() / total;
        let fb = b.partition_point(|v| *v <= x) as f64 / b.len() as f64;
        d = d.max((fa - fb).abs());
    }
    (d, ess as usize)
}
