//! One-dimensional intervals: order-statistic interval for a symmetric
//! location, sign-score inversion for median regression, and the smooth
//! `tanh` score on raw `(x, y)`.
//!
//! Two data transforms reduce a regression through the origin to the
//! location problem and are left to the caller: the ratios `y_i / x_i`
//! (symmetric around `β` when `x` is symmetric and independent of the
//! noise), and pairwise differences `(y_i − y_j, x_i − x_j)` which make any
//! design symmetric.

use crate::dist;
use crate::error::{Error, Result};
use crate::interval::{check_alpha, Interval, Method, SmoothScore};
use crate::scalar::Real;

/// Quantile levels `(s⁻, s⁺)` used by [`location_interval`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuantilePair {
    pub minus_level: f64,
    pub plus_level: f64,
}

/// How the location interval picks its order statistics.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum LevelRule {
    /// Levels `½ ∓ √(log(2/α)/(2n))`.
    #[default]
    Hoeffding,
    /// Largest `ℓ` with `2·P(Bin(n, ½) ≤ ℓ − 1) ≤ α`; interval
    /// `[X_(ℓ), X_(n+1−ℓ)]`.
    BinomialExact,
}

fn sorted<T: Real>(sample: &[T]) -> Result<Vec<T>> {
    if sample.is_empty() {
        return Err(Error::InvalidArgument("empty sample".into()));
    }
    if !sample.iter().all(|v| v.is_finite()) {
        return Err(Error::NonFinite("sample"));
    }
    let mut v = sample.to_vec();
    v.sort_by(|a, b| a.partial_cmp(b).expect("finite"));
    Ok(v)
}

/// `n·s`, snapped to the nearest integer when within rounding of it.
fn scaled_level(n: usize, s: f64) -> f64 {
    let ns = n as f64 * s;
    let r = ns.round();
    if (ns - r).abs() <= 64.0 * f64::EPSILON * ns.abs().max(1.0) {
        r
    } else {
        ns
    }
}

/// 1-based index `⌈ns⌉` of `q⁻(s)`.
fn minus_index(n: usize, s: f64) -> usize {
    (scaled_level(n, s).ceil() as usize).clamp(1, n)
}

/// 1-based index `⌊ns⌋ + 1` of `q⁺(s)`.
fn plus_index(n: usize, s: f64) -> usize {
    (scaled_level(n, s).floor() as usize + 1).clamp(1, n)
}

/// `q⁻(s) = inf{t : (1/n)·#{y_i ≤ t} ≥ s}`, the `⌈ns⌉`-th order statistic.
pub fn empirical_quantile_minus<T: Real>(sample: &[T], s: f64) -> Result<T> {
    if !(s > 0.0 && s <= 1.0) {
        return Err(Error::InvalidArgument(format!("level {s} not in (0, 1]")));
    }
    let v = sorted(sample)?;
    Ok(v[minus_index(v.len(), s) - 1])
}

/// `q⁺(s) = sup{t : (1/n)·#{y_i < t} ≤ s}`, the `(⌊ns⌋+1)`-th order statistic.
pub fn empirical_quantile_plus<T: Real>(sample: &[T], s: f64) -> Result<T> {
    if !(0.0..1.0).contains(&s) {
        return Err(Error::InvalidArgument(format!("level {s} not in [0, 1)")));
    }
    let v = sorted(sample)?;
    Ok(v[plus_index(v.len(), s) - 1])
}

/// Levels `½ ∓ √(log(2/α)/(2n))`. Errors if they leave `(0, 1)`.
pub fn hoeffding_levels(n: usize, alpha: f64) -> Result<QuantilePair> {
    check_alpha(alpha)?;
    let delta = ((2.0 / alpha).ln() / (2.0 * n as f64)).sqrt();
    if !(delta < 0.5) {
        return Err(Error::InsufficientSample { n, alpha });
    }
    Ok(QuantilePair {
        minus_level: 0.5 - delta,
        plus_level: 0.5 + delta,
    })
}

/// `[q⁻(½ − δ), q⁺(½ + δ)]` with `δ = √(log(2/α)/(2n))`.
pub fn location_interval<T: Real>(sample: &[T], alpha: T) -> Result<Interval<T>> {
    location_interval_with(sample, alpha, LevelRule::Hoeffding)
}

pub fn location_interval_with<T: Real>(
    sample: &[T],
    alpha: T,
    rule: LevelRule,
) -> Result<Interval<T>> {
    let a = alpha.as_f64();
    check_alpha(a)?;
    let v = sorted(sample)?;
    let n = v.len();
    let (lo, hi) = match rule {
        LevelRule::Hoeffding => {
            let levels = hoeffding_levels(n, a)?;
            (
                minus_index(n, levels.minus_level),
                plus_index(n, levels.plus_level),
            )
        }
        LevelRule::BinomialExact => {
            let l = binomial_rank(n, a).ok_or(Error::InsufficientSample { n, alpha: a })?;
            (l, n + 1 - l)
        }
    };
    Interval::new(
        Some(v[lo - 1]),
        Some(v[hi - 1]),
        alpha,
        Method::QuantileLocation,
    )
}

/// Largest `ℓ ≤ (n+1)/2` with `2·P(Bin(n, ½) ≤ ℓ − 1) ≤ α`.
fn binomial_rank(n: usize, alpha: f64) -> Option<usize> {
    let mut best = None;
    for l in 1..=n.div_ceil(2) {
        if 2.0 * dist::binomial_half_cdf(l as u64 - 1, n as u64) <= alpha {
            best = Some(l);
        } else {
            break;
        }
    }
    best
}

/// `Σ sign(x_i β − y_i) x_i` with `sign(0) = 0`; this is `n·Z_n(β)`.
pub fn median_reg_score<T: Real>(x: &[T], y: &[T], beta: T) -> T {
    x.iter().zip(y).fold(T::zero(), |acc, (&xi, &yi)| {
        let r = xi * beta - yi;
        let s = if r > T::zero() {
            T::one()
        } else if r < T::zero() {
            -T::one()
        } else {
            T::zero()
        };
        acc + s * xi
    })
}

/// `{β : |Z_n(β)| ≤ C/√n}` with `C = √((2/n) Σ x_i² log(2/α))`, computed
/// exactly from the sorted breakpoints `y_i / x_i`.
pub fn median_reg_interval<T: Real>(x: &[T], y: &[T], alpha: T) -> Result<Interval<T>> {
    let a = alpha.as_f64();
    check_alpha(a)?;
    if x.len() != y.len() {
        return Err(Error::Dimension(format!(
            "x has length {}, y has length {}",
            x.len(),
            y.len()
        )));
    }
    let ss = x.iter().fold(T::zero(), |acc, &v| acc + v * v);
    if !(ss > T::zero()) {
        return Err(Error::DegenerateCovariate);
    }
    // n·Z_n(β) = Σ_{x_i ≠ 0} |x_i| sign(β − y_i/x_i); compare with n·C/√n.
    let threshold = (T::lit(2.0) * ss * T::lit((2.0 / a).ln())).sqrt();

    let mut knots: Vec<(T, T)> = x
        .iter()
        .zip(y)
        .filter(|(&xi, _)| xi != T::zero())
        .map(|(&xi, &yi)| (yi / xi, xi.abs()))
        .collect();
    knots.sort_by(|p, q| p.0.partial_cmp(&q.0).expect("finite"));
    // Merge ties.
    let mut merged: Vec<(T, T)> = Vec::with_capacity(knots.len());
    for (r, w) in knots {
        match merged.last_mut() {
            Some(last) if last.0 == r => last.1 = last.1 + w,
            _ => merged.push((r, w)),
        }
    }
    let total = merged.iter().fold(T::zero(), |acc, k| acc + k.1);

    // Just right of knot j the score is (weight at or below) − (weight above).
    let mut below = T::zero();
    let mut lower = None;
    let mut upper = None;
    for (j, &(r, w)) in merged.iter().enumerate() {
        let left_of = below - (total - below);
        below = below + w;
        let right_of = below - (total - below);
        if lower.is_none() && right_of >= -threshold {
            lower = Some(j);
        }
        if left_of <= threshold {
            upper = Some(r);
        }
    }
    let lower = if -total >= -threshold {
        None
    } else {
        lower.map(|j| merged[j].0)
    };
    let upper = if total <= threshold { None } else { upper };
    Interval::new(lower, upper, alpha, Method::MedianRegression)
}

/// `{β : |Σ tanh(x_i β − y_i) x_i| / √(Σ x_i²) ≤ √(2 log(2/α))}`.
///
/// This is the self-normalized form; its coverage argument relies on a
/// symmetric design independent of the noise.
pub fn smooth_univariate_interval<T: Real>(x: &[T], y: &[T], alpha: T) -> Result<Interval<T>> {
    smooth_interval_at(x, y, alpha, smooth_threshold(alpha.as_f64())?)
}

pub(crate) fn smooth_threshold(alpha: f64) -> Result<f64> {
    check_alpha(alpha)?;
    Ok((2.0 * (2.0 / alpha).ln()).sqrt())
}

/// Smooth-score interval at an explicit threshold `c`.
pub fn smooth_interval_at<T: Real>(x: &[T], y: &[T], alpha: T, c: f64) -> Result<Interval<T>> {
    check_alpha(alpha.as_f64())?;
    let score = SmoothScore::new(x, y)?;
    let (lower, upper) = score.invert(T::lit(c));
    Interval::new(lower, upper, alpha, Method::SmoothUnivariate)
}
