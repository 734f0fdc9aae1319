mod common;

use adaptive_abc_core::linalg::Matrix;
use adaptive_abc_core::models::GkModel;
use adaptive_abc_core::population::{
    build_importance_density, importance_weight, posterior_expectation, sample_proposal, Mixture,
};
use adaptive_abc_core::rng::RngStream;
use adaptive_abc_core::stats::{mvn_density, mvn_sample};
use adaptive_abc_core::{ImportanceDensity, Particle, ParticlePopulation, SimulationModel};
use common::{ks_critical_two, ks_two_sample, ConjugateToy};

fn uniform_prior_1d() -> GkModel {
    // only the first coordinate matters for these checks; reuse the (0,10) box
    GkModel::default()
}

#[test]
fn mixture_integrates_to_one() {
    let mut rng = RngStream::new(1);
    for dim in 1..=3 {
        let centers: Vec<Vec<f64>> = (0..25)
            .map(|_| (0..dim).map(|_| 4.0 * rng.open01()).collect())
            .collect();
        let weights: Vec<f64> = (0..25).map(|_| 0.1 + rng.open01()).collect();
        let kernel = Matrix::diagonal(&vec![0.3; dim]);
        let mix = Mixture::new(centers, &weights, kernel).unwrap();
        // importance sampling from a broad Gaussian around the centres
        let mean = vec![2.0; dim];
        let wide = Matrix::diagonal(&vec![4.0; dim]);
        let n = 200_000;
        let est = (0..n)
            .map(|_| {
                let x = mvn_sample(&mean, &wide, &mut rng).unwrap();
                mix.density(&x) / mvn_density(&x, &mean, &wide).unwrap()
            })
            .sum::<f64>()
            / n as f64;
        assert!((est - 1.0).abs() < 0.01, "dim {dim}: integral {est}");
    }
}

#[test]
fn prior_proposals_match_direct_prior_draws() {
    let model = ConjugateToy;
    let root = RngStream::new(2);
    let a: Vec<f64> = (0..5000)
        .map(|j| sample_proposal(&ImportanceDensity::Prior, &model, &mut root.fork(j)).unwrap().theta[0])
        .collect();
    let b: Vec<f64> = (0..5000)
        .map(|j| model.sample_prior(&mut root.fork(10_000 + j))[0])
        .collect();
    assert!(ks_two_sample(a, b) < ks_critical_two(5000, 5000));
}

fn pop_1d_in_box(centers: &[f64]) -> ParticlePopulation {
    let particles = centers
        .iter()
        .map(|c| Particle {
            theta: vec![*c, 5.0, 5.0, 5.0],
            summary: vec![0.0],
            weight: 1.0,
            distance: None,
        })
        .collect();
    ParticlePopulation::new(particles, 2).unwrap()
}

#[test]
fn proposals_stay_in_prior_support() {
    let model = uniform_prior_1d();
    let q = build_importance_density(Some(&pop_1d_in_box(&[4.999, 5.0, 5.001])), false).unwrap();
    let mut rng = RngStream::new(3);
    for _ in 0..1000 {
        let p = sample_proposal(&q, &model, &mut rng).unwrap();
        assert!((p.theta[0] - 5.0).abs() < 0.1);
    }
    // a centre hugging the boundary: negative perturbations are redrawn
    let q = build_importance_density(Some(&pop_1d_in_box(&[0.01, 0.02, 0.03, 1.0])), false).unwrap();
    let mut rejected = 0;
    for _ in 0..2000 {
        let p = sample_proposal(&q, &model, &mut rng).unwrap();
        assert!(p.theta.iter().all(|t| *t > 0.0 && *t < 10.0));
        rejected += p.support_rejections;
    }
    assert!(rejected > 0);
}

#[test]
fn importance_weight_is_prior_over_q() {
    let model = uniform_prior_1d();
    let q = build_importance_density(Some(&pop_1d_in_box(&[3.0, 7.0])), false).unwrap();
    let ImportanceDensity::Mixture(m) = &q else { panic!() };
    let theta = [4.0, 5.0, 5.0, 5.0];
    let w = importance_weight(&theta, &q, &model).unwrap();
    let want = model.prior_density(&theta) / m.density(&theta);
    assert!((w / want - 1.0).abs() < 1e-12);
    assert_eq!(importance_weight(&theta, &ImportanceDensity::Prior, &model).unwrap(), 1.0);
}

/// Self-normalised importance estimates of the prior mean under a mixture
/// proposal: the RMSE should roughly halve as the sample size quadruples.
#[test]
fn importance_estimates_converge_at_root_n() {
    let model = ConjugateToy;
    let centers: Vec<Particle> = [-1.5, -0.5, 0.5, 1.0, 2.5]
        .iter()
        .map(|c| Particle {
            theta: vec![*c],
            summary: vec![0.0],
            weight: 1.0,
            distance: None,
        })
        .collect();
    let pop = ParticlePopulation::new(centers, 2).unwrap();
    let q = build_importance_density(Some(&pop), false).unwrap();
    let root = RngStream::new(4);
    let reps = 200;
    let rmse = |n: usize, stream: u64| -> f64 {
        let mut se = 0.0;
        for r in 0..reps {
            let mut rng = root.fork(stream).fork(r);
            let particles: Vec<Particle> = (0..n)
                .map(|_| {
                    let theta = sample_proposal(&q, &model, &mut rng).unwrap().theta;
                    let weight = importance_weight(&theta, &q, &model).unwrap();
                    Particle { theta, summary: vec![0.0], weight, distance: None }
                })
                .collect();
            let p = ParticlePopulation::new(particles, 3).unwrap();
            let m = posterior_expectation(&p, |t| t.to_vec()).unwrap()[0];
            se += m * m;
        }
        (se / reps as f64).sqrt()
    };
    let (e1, e2, e3) = (rmse(1000, 1), rmse(4000, 2), rmse(16_000, 3));
    for (a, b) in [(e1, e2), (e2, e3)] {
        let ratio = b / a;
        assert!((0.35..0.7).contains(&ratio), "rmse ratio {ratio} ({a} -> {b})");
    }
}
