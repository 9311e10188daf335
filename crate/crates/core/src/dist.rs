//! Reference distributions: normal and Student-t quantiles, binomial tails.

use statrs::distribution::{Binomial, ContinuousCDF, DiscreteCDF, Normal, StudentsT};

use crate::error::{Error, Result};

fn check_prob(p: f64) -> Result<()> {
    if p > 0.0 && p < 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!(
            "probability {p} not in (0, 1)"
        )))
    }
}

/// `Φ⁻¹(p)`.
pub fn normal_quantile(p: f64) -> Result<f64> {
    check_prob(p)?;
    let n = Normal::standard();
    Ok(n.inverse_cdf(p))
}

/// Quantile of Student's t with `df` degrees of freedom.
///
/// Starts from the library inverse and polishes with Newton steps on the
/// CDF, so the result solves `F(t) = p` to about `1e-12` in probability.
pub fn student_t_quantile(p: f64, df: f64) -> Result<f64> {
    check_prob(p)?;
    if !(df > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "degrees of freedom {df} must be positive"
        )));
    }
    let dist = StudentsT::new(0.0, 1.0, df).map_err(|e| Error::InvalidArgument(e.to_string()))?;
    let mut t = dist.inverse_cdf(p);
    if !t.is_finite() {
        t = normal_quantile(p)?;
    }
    for _ in 0..8 {
        use statrs::distribution::Continuous;
        let f = dist.cdf(t) - p;
        let d = dist.pdf(t);
        if d <= 0.0 || !d.is_finite() {
            break;
        }
        let step = f / d;
        t -= step;
        if step.abs() <= 1e-14 * (1.0 + t.abs()) {
            break;
        }
    }
    Ok(t)
}

/// `P(B ≤ k)` for `B ~ Binomial(n, 1/2)`.
pub fn binomial_half_cdf(k: u64, n: u64) -> f64 {
    if k >= n {
        return 1.0;
    }
    Binomial::new(0.5, n).map(|b| b.cdf(k)).unwrap_or(f64::NAN)
}
