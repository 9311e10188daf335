//! Decorrelate-then-invert confidence interval for one coefficient.
//!
//! Given `y_i = β x_i + θᵀw_i + z_i`, the target covariate is replaced by
//! its least-squares residual `x̃ = x − α̂ᵀw` on the nuisance block, the
//! nuisance effect is removed from the response with a joint Huber fit on
//! `[x̃ | W]` (`ỹ = y − γ̂ᵀw`), and the interval is the set of `β` where the
//! self-normalized score
//!
//! ```text
//! S(β) = Σ tanh(x̃_i β − ỹ_i) x̃_i / √(Σ x̃_i²)
//! ```
//!
//! stays within `[−c, c]`. `S` is nondecreasing in `β`, so each endpoint is
//! found by bisection on the defining predicate.

use std::fmt;
use std::str::FromStr;

use ndarray::{concatenate, Array1, Axis};

use crate::dist;
use crate::error::{Error, Result};
use crate::estimators::{huber_regression, ols, tanh_score};
use crate::model::{Dataset, SplitDataset};
use crate::scalar::Real;

/// Identifies the procedure that produced an [`Interval`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Method {
    Alg1,
    Alg1Ga,
    OlsT,
    ResidualBootstrap,
    QuantileLocation,
    MedianRegression,
    SmoothUnivariate,
}

impl Method {
    pub fn tag(self) -> &'static str {
        match self {
            Method::Alg1 => "alg1",
            Method::Alg1Ga => "alg1-ga",
            Method::OlsT => "ols-t",
            Method::ResidualBootstrap => "rb",
            Method::QuantileLocation => "quantile-loc",
            Method::MedianRegression => "median-reg",
            Method::SmoothUnivariate => "smooth-univariate",
        }
    }

    pub const ALL: [Method; 7] = [
        Method::Alg1,
        Method::Alg1Ga,
        Method::OlsT,
        Method::ResidualBootstrap,
        Method::QuantileLocation,
        Method::MedianRegression,
        Method::SmoothUnivariate,
    ];
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Method::ALL
            .into_iter()
            .find(|m| m.tag() == s)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown method '{s}'")))
    }
}

/// A confidence interval; `None` on a side means unbounded on that side.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interval<T> {
    pub lower: Option<T>,
    pub upper: Option<T>,
    pub alpha: T,
    pub method: Method,
}

impl<T: Real> Interval<T> {
    pub fn new(lower: Option<T>, upper: Option<T>, alpha: T, method: Method) -> Result<Self> {
        check_alpha(alpha.as_f64())?;
        if let (Some(l), Some(u)) = (lower, upper) {
            if !(l <= u) {
                return Err(Error::InvalidArgument(format!(
                    "interval endpoints out of order: [{l}, {u}]"
                )));
            }
        }
        Ok(Self {
            lower,
            upper,
            alpha,
            method,
        })
    }

    /// Closed-interval containment.
    pub fn contains(&self, v: T) -> bool {
        self.lower.is_none_or(|l| l <= v) && self.upper.is_none_or(|u| v <= u)
    }

    pub fn is_bounded(&self) -> bool {
        self.lower.is_some() && self.upper.is_some()
    }

    /// Length, or `None` if either side is unbounded.
    pub fn length(&self) -> Option<T> {
        Some(self.upper? - self.lower?)
    }

    pub fn shifted(&self, delta: T) -> Self {
        Self {
            lower: self.lower.map(|l| l + delta),
            upper: self.upper.map(|u| u + delta),
            ..*self
        }
    }

    /// `[l, u] ↦ [−u, −l]`.
    pub fn mirrored(&self) -> Self {
        Self {
            lower: self.upper.map(|u| -u),
            upper: self.lower.map(|l| -l),
            ..*self
        }
    }
}

pub(crate) fn check_alpha(alpha: f64) -> Result<()> {
    if alpha > 0.0 && alpha < 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!(
            "alpha must lie in (0, 1), got {alpha}"
        )))
    }
}

/// How the score threshold `c` depends on `alpha`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ThresholdRule {
    /// `1.5 · √(log(2/α))`, valid without asymptotics.
    NonAsymptotic,
    /// `Φ⁻¹(1 − α/2)`.
    GaussianApprox,
}

impl ThresholdRule {
    pub fn threshold<T: Real>(self, alpha: T) -> Result<T> {
        let a = alpha.as_f64();
        check_alpha(a)?;
        let c = match self {
            ThresholdRule::NonAsymptotic => 1.5 * (2.0 / a).ln().sqrt(),
            ThresholdRule::GaussianApprox => dist::normal_quantile(1.0 - a / 2.0)?,
        };
        Ok(T::lit(c))
    }

    pub fn method(self) -> Method {
        match self {
            ThresholdRule::NonAsymptotic => Method::Alg1,
            ThresholdRule::GaussianApprox => Method::Alg1Ga,
        }
    }
}

/// Output of [`decorrelate`].
#[derive(Debug, Clone, PartialEq)]
pub struct DecorrelatedPair<T> {
    pub x_tilde: Array1<T>,
    pub y_tilde: Array1<T>,
    pub alpha_hat: Array1<T>,
    pub gamma_hat: Array1<T>,
}

/// Builds `(x̃, ỹ)`. The `β` component of the joint Huber fit is dropped.
pub fn decorrelate<T: Real>(split: &SplitDataset<T>) -> Result<DecorrelatedPair<T>> {
    let n = split.n();
    let k = split.w.ncols();
    if n <= k + 1 {
        return Err(Error::InvalidArgument(format!(
            "need n > p, got n = {n}, p = {}",
            k + 1
        )));
    }
    let alpha_hat = ols(split.x.view(), split.w.view())?.coefficients;
    let x_tilde = &split.x - &split.w.dot(&alpha_hat);
    let sxx = x_tilde.iter().fold(T::zero(), |acc, &v| acc + v * v);
    let sx = split.x.iter().fold(T::zero(), |acc, &v| acc + v * v);
    if !(sxx > T::tol(1e-24) * sx) {
        return Err(Error::Collinear);
    }
    let z = concatenate(
        Axis(1),
        &[x_tilde.view().insert_axis(Axis(1)), split.w.view()],
    )
    .map_err(|e| Error::Dimension(e.to_string()))?;
    let fit = huber_regression(split.y.view(), z.view(), None).map_err(|e| match e {
        Error::SingularDesign => Error::Collinear,
        other => other,
    })?;
    let gamma_hat = fit.coefficients.slice(ndarray::s![1..]).to_owned();
    let y_tilde = &split.y - &split.w.dot(&gamma_hat);
    Ok(DecorrelatedPair {
        x_tilde,
        y_tilde,
        alpha_hat,
        gamma_hat,
    })
}

/// `β ↦ Σ tanh(x_i β − y_i) x_i / √(Σ x_i²)` on a fixed `(x, y)`.
#[derive(Debug, Clone, Copy)]
pub struct SmoothScore<'a, T> {
    x: &'a [T],
    y: &'a [T],
    inv_norm: T,
}

impl<'a, T: Real> SmoothScore<'a, T> {
    pub fn new(x: &'a [T], y: &'a [T]) -> Result<Self> {
        if x.len() != y.len() {
            return Err(Error::Dimension(format!(
                "x has length {}, y has length {}",
                x.len(),
                y.len()
            )));
        }
        let ss = x.iter().fold(T::zero(), |acc, &v| acc + v * v);
        if !(ss > T::zero()) || !ss.is_finite() {
            return Err(Error::DegenerateCovariate);
        }
        Ok(Self {
            x,
            y,
            inv_norm: T::one() / ss.sqrt(),
        })
    }

    pub fn eval(&self, beta: T) -> T {
        let s = self
            .x
            .iter()
            .zip(self.y)
            .fold(T::zero(), |acc, (&xi, &yi)| {
                acc + tanh_score(xi * beta - yi) * xi
            });
        s * self.inv_norm
    }

    /// `Σ|x_i| / √(Σ x_i²)`: the limits of the score at `±∞`.
    pub fn sup_bound(&self) -> T {
        self.x.iter().fold(T::zero(), |acc, &v| acc + v.abs()) * self.inv_norm
    }

    /// Closed-form least-squares slope, used only to seed the root search.
    fn ls_slope(&self) -> T {
        let sxy = self
            .x
            .iter()
            .zip(self.y)
            .fold(T::zero(), |acc, (&a, &b)| acc + a * b);
        sxy * self.inv_norm * self.inv_norm
    }

    /// Endpoints `(inf{β : S(β) ≥ −c}, sup{β : S(β) ≤ c})`; `None` where
    /// the score never leaves `[−c, c]` on that side.
    pub fn invert(&self, c: T) -> (Option<T>, Option<T>) {
        let bound = self.sup_bound();
        let center = self.root();
        let lower = if bound <= c {
            None
        } else {
            // predicate: S(β) ≥ −c, true at the root, false far left
            search_edge(center, -T::one(), |b| self.eval(b) >= -c)
        };
        let upper = if bound <= c {
            None
        } else {
            search_edge(center, T::one(), |b| self.eval(b) <= c)
        };
        (lower, upper)
    }

    /// A zero of the score (any point of the zero level set).
    pub fn root(&self) -> T {
        let start = self.ls_slope();
        let s0 = self.eval(start);
        if s0 == T::zero() {
            return start;
        }
        // Walk toward the sign change: S < 0 means the root is to the right.
        let dir = if s0 < T::zero() { T::one() } else { -T::one() };
        let holds = |b: T| {
            if dir > T::zero() {
                self.eval(b) >= T::zero()
            } else {
                self.eval(b) <= T::zero()
            }
        };
        search_edge(start, dir, |b| !holds(b)).unwrap_or(start)
    }
}

/// Bisection on a monotone predicate that holds at `from` and fails far
/// enough in direction `dir`. Returns the extreme point (in `dir`) where
/// the predicate still holds, to `1e-9 · max(1, |β|)`. `None` if no failing
/// point is found before the step overflows.
fn search_edge<T: Real, P: Fn(T) -> bool>(from: T, dir: T, pred: P) -> Option<T> {
    let mut inside = from;
    let mut step = T::one().max(from.abs() * T::lit(1e-3));
    let mut outside = None;
    for _ in 0..2100 {
        let probe = from + dir * step;
        if !probe.is_finite() {
            break;
        }
        if pred(probe) {
            inside = probe;
            step = step + step;
        } else {
            outside = Some(probe);
            break;
        }
    }
    let mut outside = outside?;
    let rel = T::tol(1e-9);
    loop {
        let width = (outside - inside).abs();
        if width <= rel * T::one().max(inside.abs()) {
            break;
        }
        let mid = inside + (outside - inside) * T::lit(0.5);
        if mid == inside || mid == outside {
            break;
        }
        if pred(mid) {
            inside = mid;
        } else {
            outside = mid;
        }
    }
    Some(inside)
}

pub fn score_statistic<T: Real>(pair: &DecorrelatedPair<T>, beta: T) -> Result<T> {
    let score = SmoothScore::new(
        pair.x_tilde.as_slice().expect("contiguous"),
        pair.y_tilde.as_slice().expect("contiguous"),
    )?;
    Ok(score.eval(beta))
}

pub fn invert_score<T: Real>(
    pair: &DecorrelatedPair<T>,
    alpha: T,
    rule: ThresholdRule,
) -> Result<Interval<T>> {
    let c = rule.threshold(alpha)?;
    let score = SmoothScore::new(
        pair.x_tilde.as_slice().expect("contiguous"),
        pair.y_tilde.as_slice().expect("contiguous"),
    )?;
    let (lower, upper) = score.invert(c);
    Interval::new(lower, upper, alpha, rule.method())
}

/// The full pipeline for the coefficient at 1-based `target_index`.
pub fn confidence_interval<T: Real>(
    dataset: &Dataset<T>,
    target_index: usize,
    alpha: T,
    rule: ThresholdRule,
) -> Result<Interval<T>> {
    check_alpha(alpha.as_f64())?;
    let split = dataset.split(target_index)?;
    let pair = decorrelate(&split)?;
    invert_score(&pair, alpha, rule)
}
