//! Weighted particle populations and the importance densities built from them.

use alloc::vec::Vec;

use crate::error::{check_dim, Error, Result};
use crate::linalg::Matrix;
use crate::model::SimulationModel;
use crate::rng::RngStream;
use crate::stats::{weighted_mean_cov, Gaussian, WeightedSample};

/// Consecutive prior-support rejections tolerated before giving up.
pub const MAX_SUPPORT_REJECTIONS: u64 = 1_000_000;

/// Populations at least this large pick mixture components with an alias table.
pub const ALIAS_THRESHOLD: usize = 512;

#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Particle {
    pub theta: Vec<f64>,
    pub summary: Vec<f64>,
    pub weight: f64,
    pub distance: Option<f64>,
}

/// The accepted, weighted particles of one iteration.
#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ParticlePopulation {
    particles: Vec<Particle>,
    iteration: usize,
}

impl ParticlePopulation {
    pub fn new(particles: Vec<Particle>, iteration: usize) -> Result<Self> {
        let first = particles.first().ok_or(Error::Empty("population"))?;
        let (n, m) = (first.theta.len(), first.summary.len());
        for p in &particles {
            check_dim("particle theta", n, p.theta.len())?;
            check_dim("particle summary", m, p.summary.len())?;
            if !(p.weight.is_finite() && p.weight >= 0.0) {
                return Err(Error::InvalidArgument("particle weights must be finite and >= 0".into()));
            }
        }
        if !particles.iter().any(|p| p.weight > 0.0) {
            return Err(Error::ZeroWeights);
        }
        Ok(Self {
            particles,
            iteration,
        })
    }

    pub fn particles(&self) -> &[Particle] {
        &self.particles
    }

    pub fn iteration(&self) -> usize {
        self.iteration
    }

    pub fn len(&self) -> usize {
        self.particles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.particles.is_empty()
    }

    pub fn n_params(&self) -> usize {
        self.particles[0].theta.len()
    }

    pub fn weighted_sample(&self) -> WeightedSample {
        WeightedSample::new(
            self.particles.iter().map(|p| p.theta.clone()).collect(),
            self.particles.iter().map(|p| p.weight).collect(),
        )
        .expect("population invariants imply a valid weighted sample")
    }

    /// Largest over smallest importance weight.
    pub fn weight_ratio(&self) -> f64 {
        let (mut max, mut min) = (0.0f64, f64::INFINITY);
        for p in &self.particles {
            max = max.max(p.weight);
            min = min.min(p.weight);
        }
        max / min
    }
}

/// Picks a mixture component in proportion to its weight.
#[derive(Clone, Debug)]
enum ComponentPicker {
    Linear { cumulative: Vec<f64> },
    Alias { prob: Vec<f64>, alias: Vec<usize> },
}

impl ComponentPicker {
    fn new(weights: &[f64]) -> Self {
        if weights.len() >= ALIAS_THRESHOLD {
            Self::alias(weights)
        } else {
            let mut acc = 0.0;
            let cumulative = weights
                .iter()
                .map(|w| {
                    acc += w;
                    acc
                })
                .collect();
            Self::Linear { cumulative }
        }
    }

    // Vose's alias method
    fn alias(weights: &[f64]) -> Self {
        let n = weights.len();
        let total: f64 = weights.iter().sum();
        let mut prob: Vec<f64> = weights.iter().map(|w| w * n as f64 / total).collect();
        let mut alias: Vec<usize> = (0..n).collect();
        let (mut small, mut large): (Vec<usize>, Vec<usize>) = (0..n).partition(|&i| prob[i] < 1.0);
        while let (Some(s), Some(&l)) = (small.pop(), large.last()) {
            alias[s] = l;
            prob[l] -= 1.0 - prob[s];
            if prob[l] < 1.0 {
                large.pop();
                small.push(l);
            }
        }
        for i in small.into_iter().chain(large) {
            prob[i] = 1.0;
        }
        Self::Alias { prob, alias }
    }

    fn pick(&self, rng: &mut RngStream) -> usize {
        match self {
            Self::Linear { cumulative } => {
                let total = *cumulative.last().expect("non-empty mixture");
                let u = rng.open01() * total;
                cumulative
                    .iter()
                    .position(|c| u < *c)
                    .unwrap_or(cumulative.len() - 1)
            }
            Self::Alias { prob, alias } => {
                let n = prob.len();
                let i = ((rng.open01() * n as f64) as usize).min(n - 1);
                if rng.open01() < prob[i] {
                    i
                } else {
                    alias[i]
                }
            }
        }
    }
}

/// Gaussian-mixture perturbation of a weighted population.
#[derive(Clone, Debug)]
pub struct Mixture {
    centers: Vec<Vec<f64>>,
    mixture_weights: Vec<f64>,
    kernel_cov: Matrix,
    kernel: Gaussian,
    // centres mapped through the inverse kernel factor, for O(n) density terms
    whitened_centers: Vec<Vec<f64>>,
    log_weights: Vec<f64>,
    picker: ComponentPicker,
}

impl Mixture {
    /// Mixture with components `N(center_i, kernel_cov)` and weights
    /// proportional to `weights`.
    pub fn new(centers: Vec<Vec<f64>>, weights: &[f64], kernel_cov: Matrix) -> Result<Self> {
        check_dim("mixture weights", centers.len(), weights.len())?;
        let dim = kernel_cov.dim();
        for c in &centers {
            check_dim("mixture center", dim, c.len())?;
        }
        let total: f64 = weights.iter().sum();
        if !(total > 0.0) || weights.iter().any(|w| *w < 0.0 || !w.is_finite()) {
            return Err(Error::ZeroWeights);
        }
        // drop zero-weight components, they can never be proposed
        let (centers, mixture_weights): (Vec<_>, Vec<_>) = centers
            .into_iter()
            .zip(weights.iter().map(|w| w / total))
            .filter(|(_, w)| *w > 0.0)
            .unzip();
        let kernel = Gaussian::new(&kernel_cov)?;
        let whitened_centers = centers.iter().map(|c| kernel.whiten(c)).collect();
        let log_weights = mixture_weights.iter().map(|w| libm::log(*w)).collect();
        let picker = ComponentPicker::new(&mixture_weights);
        Ok(Self {
            centers,
            mixture_weights,
            kernel_cov,
            kernel,
            whitened_centers,
            log_weights,
            picker,
        })
    }

    pub fn centers(&self) -> &[Vec<f64>] {
        &self.centers
    }

    pub fn mixture_weights(&self) -> &[f64] {
        &self.mixture_weights
    }

    /// Kernel covariance before any regularization.
    pub fn kernel_cov(&self) -> &Matrix {
        &self.kernel_cov
    }

    pub fn sample(&self, rng: &mut RngStream) -> Vec<f64> {
        let i = self.picker.pick(rng);
        let offset = self.kernel.sample_offset(rng);
        self.centers[i].iter().zip(offset).map(|(c, o)| c + o).collect()
    }

    pub fn log_density(&self, theta: &[f64]) -> f64 {
        let y = self.kernel.whiten(theta);
        let terms: Vec<f64> = self
            .whitened_centers
            .iter()
            .zip(&self.log_weights)
            .map(|(c, lw)| {
                let q: f64 = y.iter().zip(c).map(|(a, b)| (a - b) * (a - b)).sum();
                lw - 0.5 * q
            })
            .collect();
        let max = terms.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        if max == f64::NEG_INFINITY {
            return max;
        }
        let sum: f64 = terms.iter().map(|t| libm::exp(t - max)).sum();
        self.kernel.log_norm() + max + libm::log(sum)
    }

    pub fn density(&self, theta: &[f64]) -> f64 {
        libm::exp(self.log_density(theta))
    }
}

/// Importance density for one iteration.
#[derive(Clone, Debug)]
pub enum ImportanceDensity {
    Prior,
    Mixture(Mixture),
}

/// The prior at the first iteration (and at the second when the first
/// threshold was infinite); otherwise a mixture centred on the previous
/// population with kernel covariance twice its weighted covariance.
pub fn build_importance_density(
    previous: Option<&ParticlePopulation>,
    h1_was_infinite: bool,
) -> Result<ImportanceDensity> {
    let pop = match previous {
        None => return Ok(ImportanceDensity::Prior),
        Some(p) if p.iteration() == 1 && h1_was_infinite => return Ok(ImportanceDensity::Prior),
        Some(p) => p,
    };
    let sample = pop.weighted_sample();
    let (_, cov) = weighted_mean_cov(&sample);
    let kernel_cov = cov.scaled(2.0);
    let centers = pop.particles().iter().map(|p| p.theta.clone()).collect();
    let weights: Vec<f64> = pop.particles().iter().map(|p| p.weight).collect();
    Mixture::new(centers, &weights, kernel_cov).map(ImportanceDensity::Mixture)
}

/// A proposal and the number of prior-support rejections it took.
#[derive(Clone, Debug, PartialEq)]
pub struct Proposal {
    pub theta: Vec<f64>,
    pub support_rejections: u64,
}

/// Draws from `q` until the draw has positive prior density.
pub fn sample_proposal<M: SimulationModel + ?Sized>(
    q: &ImportanceDensity,
    model: &M,
    rng: &mut RngStream,
) -> Result<Proposal> {
    let mut support_rejections = 0;
    while support_rejections < MAX_SUPPORT_REJECTIONS {
        let theta = match q {
            ImportanceDensity::Prior => model.sample_prior(rng),
            ImportanceDensity::Mixture(m) => m.sample(rng),
        };
        if model.prior_density(&theta) > 0.0 {
            return Ok(Proposal {
                theta,
                support_rejections,
            });
        }
        support_rejections += 1;
    }
    Err(Error::SupportEscape(support_rejections))
}

/// `prior(theta) / q(theta)`; exactly 1 when `q` is the prior.
pub fn importance_weight<M: SimulationModel + ?Sized>(
    theta: &[f64],
    q: &ImportanceDensity,
    model: &M,
) -> Result<f64> {
    let prior = model.prior_density(theta);
    if !(prior > 0.0) {
        return Err(Error::InvalidArgument("theta lies outside the prior support".into()));
    }
    match q {
        ImportanceDensity::Prior => Ok(1.0),
        ImportanceDensity::Mixture(m) => {
            check_dim("theta", m.kernel_cov().dim(), theta.len())?;
            let log_q = m.log_density(theta);
            if log_q == f64::NEG_INFINITY {
                return Err(Error::SupportViolation);
            }
            Ok(libm::exp(libm::log(prior) - log_q))
        }
    }
}

/// Self-normalized estimate of `E[f(theta)]` over the population.
pub fn posterior_expectation<F>(pop: &ParticlePopulation, f: F) -> Result<Vec<f64>>
where
    F: Fn(&[f64]) -> Vec<f64>,
{
    let total: f64 = pop.particles().iter().map(|p| p.weight).sum();
    if !(total > 0.0) {
        return Err(Error::ZeroWeights);
    }
    let mut acc: Option<Vec<f64>> = None;
    for p in pop.particles().iter().filter(|p| p.weight > 0.0) {
        let v = f(&p.theta);
        match acc.as_mut() {
            None => acc = Some(v.iter().map(|x| x * p.weight).collect()),
            Some(a) => {
                check_dim("posterior_expectation output", a.len(), v.len())?;
                for (s, x) in a.iter_mut().zip(v) {
                    *s += x * p.weight;
                }
            }
        }
    }
    Ok(acc.unwrap_or_default().into_iter().map(|s| s / total).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn particle(theta: &[f64], weight: f64) -> Particle {
        Particle {
            theta: theta.to_vec(),
            summary: vec![0.0],
            weight,
            distance: None,
        }
    }

    #[test]
    fn population_validation() {
        assert!(ParticlePopulation::new(vec![], 1).is_err());
        assert_eq!(
            ParticlePopulation::new(vec![particle(&[1.0], 0.0)], 1),
            Err(Error::ZeroWeights)
        );
        assert!(ParticlePopulation::new(vec![particle(&[1.0], 1.0), particle(&[1.0, 2.0], 1.0)], 1)
            .is_err());
    }

    #[test]
    fn prior_when_absent_or_after_infinite_h1() {
        assert!(matches!(build_importance_density(None, false), Ok(ImportanceDensity::Prior)));
        let pop = ParticlePopulation::new(vec![particle(&[1.0], 1.0), particle(&[2.0], 1.0)], 1)
            .unwrap();
        assert!(matches!(
            build_importance_density(Some(&pop), true),
            Ok(ImportanceDensity::Prior)
        ));
        assert!(matches!(
            build_importance_density(Some(&pop), false),
            Ok(ImportanceDensity::Mixture(_))
        ));
        let pop2 = ParticlePopulation::new(vec![particle(&[1.0], 1.0), particle(&[2.0], 1.0)], 2)
            .unwrap();
        assert!(matches!(
            build_importance_density(Some(&pop2), true),
            Ok(ImportanceDensity::Mixture(_))
        ));
    }

    #[test]
    fn two_point_mixture_density() {
        let pop = ParticlePopulation::new(vec![particle(&[0.0], 1.0), particle(&[2.0], 1.0)], 2)
            .unwrap();
        let ImportanceDensity::Mixture(m) = build_importance_density(Some(&pop), false).unwrap()
        else {
            panic!("expected mixture")
        };
        assert_eq!(m.kernel_cov()[(0, 0)], 2.0);
        let expected = libm::exp(-0.25) / libm::sqrt(4.0 * core::f64::consts::PI);
        assert!((m.density(&[1.0]) - expected).abs() < 1e-12);
        assert!((expected - 0.2197).abs() < 1e-4);
    }

    #[test]
    fn kernel_cov_is_twice_weighted_cov() {
        let pop = ParticlePopulation::new(
            vec![particle(&[0.3], 2.0), particle(&[1.7], 1.0), particle(&[-0.4], 0.5)],
            3,
        )
        .unwrap();
        let (_, cov) = weighted_mean_cov(&pop.weighted_sample());
        let ImportanceDensity::Mixture(m) = build_importance_density(Some(&pop), false).unwrap()
        else {
            panic!("expected mixture")
        };
        assert_eq!(m.kernel_cov()[(0, 0)].to_bits(), (2.0 * cov[(0, 0)]).to_bits());
        assert!((m.mixture_weights().iter().sum::<f64>() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn single_particle_population_still_proposes() {
        let pop = ParticlePopulation::new(vec![particle(&[1.0], 1.0)], 2).unwrap();
        let q = build_importance_density(Some(&pop), false).unwrap();
        let ImportanceDensity::Mixture(m) = &q else {
            panic!("expected mixture")
        };
        let mut rng = RngStream::new(9);
        for _ in 0..100 {
            let x = m.sample(&mut rng);
            assert!((x[0] - 1.0).abs() < 1e-3);
        }
    }

    #[test]
    fn alias_picker_matches_weights() {
        let weights: Vec<f64> = (0..600).map(|i| if i % 3 == 0 { 2.0 } else { 1.0 }).collect();
        let picker = ComponentPicker::new(&weights);
        assert!(matches!(picker, ComponentPicker::Alias { .. }));
        let mut rng = RngStream::new(11);
        let draws = 400_000;
        let heavy = (0..draws).filter(|_| picker.pick(&mut rng) % 3 == 0).count();
        // heavy components carry 400 / 800 of the mass
        let p = heavy as f64 / draws as f64;
        assert!((p - 0.5).abs() < 0.005, "{p}");
    }

    #[test]
    fn posterior_expectation_examples() {
        let pop = ParticlePopulation::new(
            vec![particle(&[1.0], 1.0), particle(&[2.0], 1.0), particle(&[3.0], 1.0)],
            1,
        )
        .unwrap();
        assert_eq!(posterior_expectation(&pop, |t| t.to_vec()).unwrap(), vec![2.0]);
        let pop = ParticlePopulation::new(vec![particle(&[0.0], 3.0), particle(&[4.0], 1.0)], 1)
            .unwrap();
        assert_eq!(posterior_expectation(&pop, |t| t.to_vec()).unwrap(), vec![1.0]);
        let scaled = ParticlePopulation::new(vec![particle(&[0.0], 21.0), particle(&[4.0], 7.0)], 1)
            .unwrap();
        assert_eq!(posterior_expectation(&scaled, |t| t.to_vec()).unwrap(), vec![1.0]);
    }
}
