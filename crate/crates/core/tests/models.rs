mod common;

use adaptive_abc_core::models::{
    gk_quantile, gk_simulate_order_stats, hazards, lv_trajectory, make_observed_dataset, next_event,
    normal_toy_simulate, GkModel, GkParams, LotkaVolterraModel, NormalToyModel, Reaction,
    Trajectory,
};
use adaptive_abc_core::rng::RngStream;
use adaptive_abc_core::stats::normal_quantile;
use adaptive_abc_core::SimulationModel;
use common::{ks_critical_one, ks_critical_two, ks_one_sample, ks_two_sample};
use statrs::distribution::{Beta, ContinuousCDF, Exp, Normal};

fn mean_sd(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let m = xs.iter().sum::<f64>() / n;
    let v = xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (n - 1.0);
    (m, v.sqrt())
}

#[test]
fn normal_toy_moments() {
    let model = NormalToyModel::default();
    let root = RngStream::new(11);
    let s1: Vec<f64> = (0..100_000)
        .map(|j| normal_toy_simulate(&model, 5.0, &mut root.fork(j))[0])
        .collect();
    let (m, sd) = mean_sd(&s1);
    assert!((m - 5.0).abs() < 0.002, "mean {m}");
    assert!((sd / 0.1 - 1.0).abs() < 0.02, "sd {sd}");
}

#[test]
fn normal_toy_noise_summary_ignores_theta() {
    let model = NormalToyModel::default();
    let root = RngStream::new(12);
    let at = |theta: f64, offset: u64| -> Vec<f64> {
        (0..5000)
            .map(|j| normal_toy_simulate(&model, theta, &mut root.fork(offset + j))[1])
            .collect()
    };
    let d = ks_two_sample(at(0.0, 0), at(1000.0, 10_000));
    assert!(d < ks_critical_two(5000, 5000), "KS {d}");
}

#[test]
fn gk_quantile_examples() {
    let p = GkParams { a: 3.0, b: 1.0, g: 1.5, k: 0.5 };
    assert_eq!(gk_quantile(0.5, p, 0.8).unwrap(), 3.0);
    let std = GkParams { a: 0.0, b: 1.0, g: 0.0, k: 0.0 };
    assert!((gk_quantile(0.975, std, 0.8).unwrap() - 1.959964).abs() < 1e-6);
    assert!(gk_quantile(0.0, p, 0.8).is_err());
    assert!(gk_quantile(1.0, p, 0.8).is_err());
}

#[test]
fn gk_quantile_monotone_on_grid() {
    let xs: Vec<f64> = (1..1000).map(|i| i as f64 / 1000.0).collect();
    for a in [0.0, 3.0, 9.5] {
        for b in [0.1, 1.0, 9.0] {
            for g in [0.0, 1.5, 5.0, 9.9] {
                for k in [0.0, 0.5, 3.0, 9.9] {
                    let p = GkParams { a, b, g, k };
                    let q: Vec<f64> = xs.iter().map(|x| gk_quantile(*x, p, 0.8).unwrap()).collect();
                    assert!(q.windows(2).all(|w| w[0] < w[1]), "not monotone at {p:?}");
                }
            }
        }
    }
}

#[test]
fn gk_reduces_to_scaled_normal() {
    let n = Normal::new(0.0, 1.0).unwrap();
    for i in 1..200 {
        let x = i as f64 / 200.0;
        let p = GkParams { a: 2.0, b: 3.0, g: 0.0, k: 0.0 };
        let got = gk_quantile(x, p, 0.8).unwrap();
        let want = 2.0 + 3.0 * normal_quantile(x).unwrap();
        assert!((got - want).abs() <= 1e-12 * want.abs().max(1.0));
        // independent oracle for the normal quantile itself
        assert!((normal_quantile(x).unwrap() - n.inverse_cdf(x)).abs() < 1e-9);
    }
}

#[test]
fn order_stats_are_sorted() {
    let model = GkModel::default();
    let root = RngStream::new(3);
    let p = GkParams { a: 3.0, b: 1.0, g: 1.5, k: 0.5 };
    for j in 0..200 {
        let s = gk_simulate_order_stats(p, &model, &mut root.fork(j));
        assert_eq!(s.len(), 7);
        assert!(s.windows(2).all(|w| w[0] < w[1]));
    }
}

#[test]
fn beta_marginal_of_large_order_statistic() {
    let model = GkModel::default();
    let root = RngStream::new(4);
    let u: Vec<f64> = (0..10_000)
        .map(|j| model.sample_uniform_order_stats(&mut root.fork(j))[1])
        .collect();
    let (m, _) = mean_sd(&u);
    let (a, b) = (2500.0f64, 7501.0f64);
    let sd = (a * b / ((a + b) * (a + b) * (a + b + 1.0))).sqrt();
    let se = sd / 100.0;
    assert!((m - 0.25).abs() < 3.0 * se, "mean {m} se {se}");
}

#[test]
fn order_stat_sampler_matches_sort_oracle() {
    let model = GkModel::new(0.8, vec![5, 10, 15], 20).unwrap();
    let root = RngStream::new(5);
    let draws = 10_000;
    let fast: Vec<Vec<f64>> = (0..draws)
        .map(|j| model.sample_uniform_order_stats(&mut root.fork(j)))
        .collect();
    let slow: Vec<Vec<f64>> = (0..draws)
        .map(|j| {
            let mut rng = root.fork(1_000_000 + j);
            let mut xs: Vec<f64> = (0..20).map(|_| rng.open01()).collect();
            xs.sort_by(f64::total_cmp);
            vec![xs[4], xs[9], xs[14]]
        })
        .collect();
    for (c, &i) in [5usize, 10, 15].iter().enumerate() {
        let a: Vec<f64> = fast.iter().map(|v| v[c]).collect();
        let b: Vec<f64> = slow.iter().map(|v| v[c]).collect();
        let d = ks_two_sample(a.clone(), b);
        assert!(d < ks_critical_two(draws as usize, draws as usize), "index {i}: KS {d}");
        let beta = Beta::new(i as f64, (21 - i) as f64).unwrap();
        let d1 = ks_one_sample(a, |x| beta.cdf(x));
        assert!(d1 < ks_critical_one(draws as usize), "index {i}: KS vs Beta {d1}");
    }
    // joint structure: spacings between consecutive picks are positive
    assert!(fast.iter().all(|v| v[0] < v[1] && v[1] < v[2]));
}

#[test]
fn gillespie_initial_hazards() {
    let h = hazards((50, 100), [1.0, 0.005, 0.6]);
    assert_eq!(h, [50.0, 25.0, 60.0]);
    assert_eq!(h.iter().sum::<f64>(), 135.0);
}

#[test]
fn gillespie_event_law_at_initial_state() {
    let root = RngStream::new(6);
    let n = 20_000;
    let mut counts = [0usize; 3];
    let mut dts = Vec::with_capacity(n);
    for j in 0..n as u64 {
        let (dt, r) = next_event((50, 100), [1.0, 0.005, 0.6], &mut root.fork(j)).unwrap();
        dts.push(dt);
        counts[match r {
            Reaction::PreyBirth => 0,
            Reaction::Predation => 1,
            Reaction::PredatorDeath => 2,
        }] += 1;
    }
    for (c, h) in counts.iter().zip([50.0, 25.0, 60.0]) {
        let p = h / 135.0;
        let se = (p * (1.0 - p) / n as f64).sqrt();
        assert!((*c as f64 / n as f64 - p).abs() < 4.0 * se);
    }
    let exp = Exp::new(135.0).unwrap();
    let d = ks_one_sample(dts, |x| exp.cdf(x));
    assert!(d < ks_critical_one(n), "KS {d}");
}

#[test]
fn pure_birth_mean() {
    let model = LotkaVolterraModel {
        obs_times: vec![1.0],
        ..Default::default()
    };
    let root = RngStream::new(7);
    let xs: Vec<f64> = (0..20_000)
        .map(|j| match lv_trajectory([0.5, 0.0, 0.6], &model, &mut root.fork(j)) {
            Trajectory::Complete(s) => s[0].0 as f64,
            Trajectory::Capped => panic!("capped"),
        })
        .collect();
    let (m, sd) = mean_sd(&xs);
    let want = 50.0 * 0.5f64.exp();
    assert!((m - want).abs() < 3.0 * sd / (xs.len() as f64).sqrt(), "mean {m} vs {want}");
}

#[test]
fn lv_states_stay_non_negative_and_latch() {
    let model = LotkaVolterraModel::default();
    let root = RngStream::new(9);
    for j in 0..50 {
        let theta = model.sample_prior(&mut root.fork(2 * j));
        let rates = [theta[0].exp(), theta[1].exp(), theta[2].exp()];
        if let Trajectory::Complete(states) = lv_trajectory(rates, &model, &mut root.fork(2 * j + 1)) {
            assert_eq!(states.len(), 16);
        }
    }
    // no transitions at all -> every observation equals the initial state
    let frozen = lv_trajectory([0.0, 0.0, 0.0], &model, &mut RngStream::new(1));
    assert_eq!(frozen, Trajectory::Complete(vec![(50, 100); 16]));
}

#[test]
fn observed_dataset_records_provenance() {
    let model = LotkaVolterraModel::default();
    let truth = [0.0, 0.005f64.ln(), 0.6f64.ln()];
    let a = make_observed_dataset(&model, Some(&truth), 42).unwrap();
    let b = make_observed_dataset(&model, Some(&truth), 42).unwrap();
    assert_eq!(a, b);
    assert_eq!(a.summaries.len(), 32);
    assert_eq!(a.truth, truth.to_vec());
    assert_eq!(a.seed, 42);

    let gk = GkModel::default();
    let drawn = make_observed_dataset(&gk, None, 1).unwrap();
    assert!(gk.prior_density(&drawn.truth) > 0.0);
    assert!(make_observed_dataset(&gk, Some(&[11.0, 1.0, 1.0, 1.0]), 1).is_err());
}
