//! Monte Carlo estimators against closed forms and naive reference loops.

use std::f64::consts::PI;

use sensyn::bounds::truncation_interval;
use sensyn::dgsm::{dgsm, DEFAULT_H, GRADIENT_STREAM};
use sensyn::linalg::DEFAULT_THRESHOLD;
use sensyn::models::{analytic_anova, Model};
use sensyn::randkit::{normal_cdf, InputDistribution, RngStream};
use sensyn::subspace::{global_active_subspace, GAS_STREAM};
use sensyn::variance::{estimate_variance, lower_sobol, upper_sobol, LOWER_STREAM, UPPER_STREAM};

fn close(a: &[f64], b: &[f64], tol: f64) {
    for (i, (x, y)) in a.iter().zip(b).enumerate() {
        assert!((x - y).abs() <= tol, "entry {i}: {x} vs {y} (tol {tol})\n{a:?}\n{b:?}");
    }
}

#[test]
fn variance_matches_naive_two_pass() {
    let model = Model::example4().unwrap();
    let est = estimate_variance(&model, 200_000, &RngStream::new(11, 0)).unwrap();
    let mut rng = RngStream::new(12, 0);
    let ys: Vec<f64> = (0..200_000).map(|_| model.eval_clean(&model.sample_point(&mut rng))).collect();
    let mean = ys.iter().sum::<f64>() / ys.len() as f64;
    let var = ys.iter().map(|y| (y - mean).powi(2)).sum::<f64>() / (ys.len() - 1) as f64;
    let exact = analytic_anova(&model).unwrap().sigma2;
    assert!((est.sigma2 - exact).abs() / exact < 0.02, "{} vs {exact}", est.sigma2);
    assert!((var - exact).abs() / exact < 0.02);
}

#[test]
fn example1_indices_match_oracle() {
    let model = Model::example1(0.0).unwrap();
    let exact = analytic_anova(&model).unwrap();
    let upper = upper_sobol(&model, 100_000, &RngStream::new(5, UPPER_STREAM)).unwrap();
    let lower = lower_sobol(&model, 100_000, &RngStream::new(5, LOWER_STREAM)).unwrap();
    close(&upper.indices, &exact.upper, 0.01);
    close(&lower.indices, &exact.lower, 0.01);
}

#[test]
fn example4_lower_indices_match_oracle() {
    let model = Model::example4().unwrap();
    let exact = analytic_anova(&model).unwrap();
    let lower = lower_sobol(&model, 200_000, &RngStream::new(8, LOWER_STREAM)).unwrap();
    close(&lower.indices, &exact.lower, 0.01);
}

#[test]
fn linear_on_normal_inputs() {
    let c = vec![1.0, -2.0, 0.5];
    let sd = [1.0, 0.5, 3.0];
    let marginals = sd.iter().map(|s| InputDistribution::normal(1.0, *s).unwrap()).collect();
    let model = Model::linear(c.clone(), marginals).unwrap();
    let parts: Vec<f64> = c.iter().zip(&sd).map(|(c, s)| (c * s).powi(2)).collect();
    let total: f64 = parts.iter().sum();
    let shares: Vec<f64> = parts.iter().map(|p| p / total).collect();
    let upper = upper_sobol(&model, 100_000, &RngStream::new(3, UPPER_STREAM)).unwrap();
    let lower = lower_sobol(&model, 100_000, &RngStream::new(3, LOWER_STREAM)).unwrap();
    close(&upper.indices, &shares, 0.01);
    close(&lower.indices, &shares, 0.01);
    close(&analytic_anova(&model).unwrap().upper, &shares, 1e-12);
}

// theta^T z and theta^T z' are standard normals with correlation 1 - theta_i^2
// when z' resamples coordinate i, and theta_i^2 when they share only z_i.
#[test]
fn example2_indices_match_bivariate_normal_closed_form() {
    let model = Model::example2().unwrap();
    let theta = model.ridge_direction().unwrap().to_vec();
    let upper_exact: Vec<f64> = theta.iter().map(|t| 2.0 * (1.0 - t * t).acos() / PI).collect();
    let lower_exact: Vec<f64> = theta.iter().map(|t| 2.0 * (t * t).asin() / PI).collect();
    let upper = upper_sobol(&model, 200_000, &RngStream::new(21, UPPER_STREAM)).unwrap();
    let lower = lower_sobol(&model, 200_000, &RngStream::new(21, LOWER_STREAM)).unwrap();
    close(&upper.indices, &upper_exact, 0.01);
    close(&lower.indices, &lower_exact, 0.01);
    assert!((upper.sigma2 - 0.25).abs() < 0.005);
    // the exact ranking follows |theta_i|
    assert_eq!(&sensyn::report::rank(&upper_exact)[..3], &[1, 2, 3]);
}

#[test]
fn linear_dgsm_and_gas_are_squared_coefficients() {
    let c = vec![3.0, -1.0, 0.25];
    let model = Model::linear_unit(c.clone()).unwrap();
    let squares: Vec<f64> = c.iter().map(|x| x * x).collect();
    let v = dgsm(&model, 500, DEFAULT_H, &RngStream::new(1, GRADIENT_STREAM)).unwrap();
    close(&v.values, &squares, 1e-9);
    let gas = global_active_subspace(&model, 500, 2, DEFAULT_THRESHOLD, &RngStream::new(1, GAS_STREAM)).unwrap();
    close(&gas.scores(3).unwrap(), &squares, 1e-9);
    assert_eq!(gas.m_selected, 1);
}

#[test]
fn noisy_dgsm_is_inflated_uniformly() {
    let k = 1.0;
    let model = Model::example1(k).unwrap();
    let v = dgsm(&model, 20_000, DEFAULT_H, &RngStream::new(4, GRADIENT_STREAM)).unwrap();
    let expected = 2.0 * k * k / (DEFAULT_H * DEFAULT_H);
    for x in &v.values {
        assert!((x / expected - 1.0).abs() < 0.05, "{x} vs {expected}");
    }
}

#[test]
fn sampled_normals_pass_kolmogorov_smirnov() {
    let dist = InputDistribution::normal(2.0, 0.5).unwrap();
    let mut rng = RngStream::new(99, 7);
    let mut xs = dist.sample(&mut rng, 20_000);
    xs.sort_by(f64::total_cmp);
    let n = xs.len() as f64;
    let stat = xs
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = normal_cdf((x - 2.0) / 0.5);
            (f - i as f64 / n).abs().max((f - (i + 1) as f64 / n).abs())
        })
        .fold(0.0, f64::max);
    // 1% critical value
    assert!(stat < 1.63 / n.sqrt(), "KS statistic {stat}");
}

#[test]
fn cheeger_grid_agrees_with_closed_form() {
    for dist in [
        InputDistribution::unit_uniform(),
        InputDistribution::uniform(-3.0, 5.0).unwrap(),
        InputDistribution::standard_normal(),
        InputDistribution::normal(-1.0, 0.3).unwrap(),
    ] {
        let exact = dist.cheeger_constant();
        let grid = dist.cheeger_constant_grid(100_001);
        assert!((grid - exact).abs() / exact < 1e-6, "{dist:?}: {grid} vs {exact}");
    }
}

#[test]
fn truncation_interval_keeps_product_mass() {
    for d in [1, 4, 10] {
        for eps in [0.001, 0.01, 0.2] {
            for dist in [InputDistribution::standard_normal(), InputDistribution::uniform(-1.0, 2.0).unwrap()] {
                let (a, b) = truncation_interval(&dist, d, eps).unwrap();
                let mass = (dist.cdf(b) - dist.cdf(a)).powi(d as i32);
                assert!((mass - (1.0 - eps)).abs() < 1e-12, "d={d} eps={eps}: {mass}");
            }
        }
    }
}
