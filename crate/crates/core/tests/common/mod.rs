#![allow(dead_code)]

use ndarray::Array1;
use rand::Rng;
use robci::model::generate_dataset;
use robci::{seed, Dataset64, DesignSpec, NoiseBase, NoiseSpec};

/// Random regression problem: AR(1) design with a random ρ, random
/// coefficients, far-outlier noise with a random ε and base law.
pub fn random_dataset(
    key: u64,
    n_range: (usize, usize),
    p_range: (usize, usize),
) -> (Dataset64, Vec<f64>) {
    let mut rng = seed::stream(seed::derive(key, &[0xfeed]));
    let n = rng.random_range(n_range.0..=n_range.1);
    let p = rng.random_range(p_range.0..=p_range.1);
    let rho = rng.random_range(-0.7..0.7);
    let eps = [0.0, 0.1, 0.3, 0.5][rng.random_range(0..4)];
    let base = if rng.random::<bool>() {
        NoiseBase::GaussianStd
    } else {
        NoiseBase::CauchyStd
    };
    let b: Vec<f64> = (0..p).map(|_| rng.random_range(-3.0..3.0)).collect();
    let design = DesignSpec::ar1(p, rho).unwrap();
    let noise = NoiseSpec::far_outliers(base, eps).unwrap();
    (generate_dataset(&design, &noise, &b, n, key).unwrap(), b)
}

pub fn with_y(d: &Dataset64, y: Array1<f64>) -> Dataset64 {
    Dataset64::new(y, d.x().clone()).unwrap()
}
