//! Comparison intervals: the classical OLS t-interval and a residual
//! bootstrap built on Huber regression.

use ndarray::Array1;
use rand::Rng;

use crate::dist;
use crate::error::{Error, Result};
use crate::estimators::{huber_fit, huber_regression, HuberOptions};
use crate::interval::{check_alpha, Interval, Method};
use crate::linalg::Qr;
use crate::model::Dataset;
use crate::scalar::Real;
use crate::seed;
use crate::univariate::{empirical_quantile_minus, empirical_quantile_plus};

fn check_regression<T: Real>(d: &Dataset<T>, target_index: usize) -> Result<()> {
    let (n, p) = (d.n(), d.p());
    if target_index == 0 || target_index > p {
        return Err(Error::IndexOutOfRange {
            index: target_index,
            p,
        });
    }
    if n <= p {
        return Err(Error::InvalidArgument(format!(
            "need n > p, got n = {n}, p = {p}"
        )));
    }
    Ok(())
}

/// `b̂_j ± t_{n−p, 1−α/2} · σ̂ · √[(XᵀX)⁻¹]_jj` with `σ̂² = RSS/(n − p)`.
pub fn ols_t_interval<T: Real>(
    dataset: &Dataset<T>,
    target_index: usize,
    alpha: T,
) -> Result<Interval<T>> {
    check_alpha(alpha.as_f64())?;
    check_regression(dataset, target_index)?;
    let (n, p) = (dataset.n(), dataset.p());
    let qr = Qr::new(dataset.x().view())?;
    let b = qr.solve(dataset.y().view())?;
    let resid = dataset.y() - &dataset.x().dot(&b);
    let rss = resid.iter().fold(T::zero(), |acc, &r| acc + r * r);
    let df = (n - p) as f64;
    let sigma2 = rss / T::lit(df);
    let j = target_index - 1;
    let se = (sigma2 * qr.inverse_gram_diag(j)).sqrt();
    let t = T::lit(dist::student_t_quantile(1.0 - alpha.as_f64() / 2.0, df)?);
    let half = t * se;
    Interval::new(Some(b[j] - half), Some(b[j] + half), alpha, Method::OlsT)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum BootstrapFlavor {
    /// `[2b̂ − Q*_{1−α/2}, 2b̂ − Q*_{α/2}]`.
    #[default]
    Basic,
    /// `[Q*_{α/2}, Q*_{1−α/2}]`.
    Percentile,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BootstrapSpec {
    pub replicates: usize,
    /// Replicate `b` draws from the stream keyed by `(seed, b)`.
    pub seed: u64,
    pub flavor: BootstrapFlavor,
}

impl BootstrapSpec {
    pub const DEFAULT_REPLICATES: usize = 200;

    pub fn new(replicates: usize, seed: u64) -> Result<Self> {
        if replicates < 2 {
            return Err(Error::InvalidArgument(format!(
                "bootstrap needs at least 2 replicates, got {replicates}"
            )));
        }
        Ok(Self {
            replicates,
            seed,
            flavor: BootstrapFlavor::Basic,
        })
    }

    pub fn with_flavor(self, flavor: BootstrapFlavor) -> Self {
        Self { flavor, ..self }
    }
}

/// Residual bootstrap: resample Huber residuals, refit, and read the
/// interval off the empirical quantiles of the refitted coefficient.
pub fn residual_bootstrap_interval<T: Real>(
    dataset: &Dataset<T>,
    target_index: usize,
    alpha: T,
    spec: &BootstrapSpec,
) -> Result<Interval<T>> {
    let a = alpha.as_f64();
    check_alpha(a)?;
    check_regression(dataset, target_index)?;
    if spec.replicates < 2 {
        return Err(Error::InvalidArgument(
            "bootstrap needs at least 2 replicates".into(),
        ));
    }
    let x = dataset.x();
    let y = dataset.y();
    let n = dataset.n();
    let j = target_index - 1;

    let fit = huber_regression(y.view(), x.view(), None)?;
    let b_hat = fit.coefficients;
    let fitted = x.dot(&b_hat);
    let resid: Array1<T> = y - &fitted;

    let opts = HuberOptions::default();
    let mut draws = Vec::with_capacity(spec.replicates);
    let mut y_star = Array1::<T>::zeros(n);
    for r in 0..spec.replicates {
        let mut rng = seed::stream(seed::derive(spec.seed, &[r as u64]));
        for i in 0..n {
            let pick = rng.random_range(0..n);
            y_star[i] = fitted[i] + resid[pick];
        }
        let refit = huber_fit(y_star.view(), x.view(), Some(b_hat.view()), &opts)?;
        if !refit.converged {
            return Err(Error::NotConverged {
                iterations: refit.iterations,
                stationarity: f64::NAN,
            });
        }
        draws.push(refit.coefficients[j]);
    }
    bootstrap_interval(b_hat[j], &draws, alpha, spec.flavor)
}

/// Interval from bootstrap draws of a coefficient estimated as `center`.
pub fn bootstrap_interval<T: Real>(
    center: T,
    draws: &[T],
    alpha: T,
    flavor: BootstrapFlavor,
) -> Result<Interval<T>> {
    let a = alpha.as_f64();
    let q_lo = empirical_quantile_minus(draws, a / 2.0)?;
    let q_hi = empirical_quantile_plus(draws, 1.0 - a / 2.0)?;
    let two = T::lit(2.0);
    let (l, u) = match flavor {
        BootstrapFlavor::Basic => (two * center - q_hi, two * center - q_lo),
        BootstrapFlavor::Percentile => (q_lo, q_hi),
    };
    Interval::new(Some(l), Some(u), alpha, Method::ResidualBootstrap)
}
