mod common;

use common::{random_dataset, with_y};
use ndarray::Array1;
use robci::baselines::{ols_t_interval, residual_bootstrap_interval, BootstrapSpec};
use robci::model::{generate_dataset, head};
use robci::{Dataset64, DesignSpec, NoiseBase, NoiseSpec};

#[test]
fn ols_t_coverage_under_gaussian_noise() {
    let design = DesignSpec::ar1(20, 0.6).unwrap();
    let noise = NoiseSpec::far_outliers(NoiseBase::GaussianStd, 0.0).unwrap();
    let reps = 500;
    let mut covered = 0;
    for r in 0..reps {
        let d: Dataset64 = generate_dataset(&design, &noise, &[0.0; 20], 1000, 10_000 + r).unwrap();
        covered += ols_t_interval(&d, 1, 0.05).unwrap().contains(0.0) as usize;
    }
    let cov = covered as f64 / reps as f64;
    assert!((cov - 0.95).abs() <= 0.03, "{cov}");
}

#[test]
fn ols_t_contains_estimate_and_shrinks_with_n() {
    let design = DesignSpec::ar1(3, 0.6).unwrap();
    let noise = NoiseSpec::far_outliers(NoiseBase::GaussianStd, 0.0).unwrap();
    let full: Dataset64 = generate_dataset(&design, &noise, &[1.0, 2.0, 3.0], 400, 8).unwrap();
    let mut prev = f64::INFINITY;
    for n in [25, 50, 100, 200, 400] {
        let d = head(&full, n).unwrap();
        let iv = ols_t_interval(&d, 1, 0.05).unwrap();
        let b = robci::estimators::ols(d.y().view(), d.x().view())
            .unwrap()
            .coefficients[0];
        assert!(iv.contains(b));
        let len = iv.length().unwrap();
        assert!(len < prev, "n={n}");
        prev = len;
    }
}

#[test]
fn bootstrap_is_deterministic() {
    let (d, _) = random_dataset(1, (80, 80), (3, 3));
    let spec = BootstrapSpec::new(60, 42).unwrap();
    let a = residual_bootstrap_interval(&d, 1, 0.05, &spec).unwrap();
    let b = residual_bootstrap_interval(&d, 1, 0.05, &spec).unwrap();
    assert_eq!(a, b);
    let c = residual_bootstrap_interval(&d, 1, 0.05, &BootstrapSpec::new(60, 43).unwrap()).unwrap();
    assert_ne!(a, c);
}

#[test]
fn bootstrap_translation_equivariance() {
    for key in 0..5 {
        let (d, _) = random_dataset(key + 10, (60, 100), (2, 4));
        let delta: Array1<f64> = (0..d.p()).map(|j| 1.5 - j as f64).collect();
        let shifted = with_y(&d, d.y() + &d.x().dot(&delta));
        let spec = BootstrapSpec::new(40, key).unwrap();
        let a = residual_bootstrap_interval(&d, 1, 0.05, &spec)
            .unwrap()
            .shifted(delta[0]);
        let b = residual_bootstrap_interval(&shifted, 1, 0.05, &spec).unwrap();
        assert!(
            (a.lower.unwrap() - b.lower.unwrap()).abs() < 1e-6,
            "key {key}"
        );
        assert!(
            (a.upper.unwrap() - b.upper.unwrap()).abs() < 1e-6,
            "key {key}"
        );
    }
}
