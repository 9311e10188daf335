//! Robust confidence intervals for a single linear-regression coefficient
//! when the responses follow a Huber contamination model.
//!
//! The main entry point is [`interval::confidence_interval`]: it decorrelates
//! the target covariate from the nuisance block by least squares, removes the
//! nuisance effect from the response with a Huber fit, and inverts a
//! self-normalized `tanh` score to get `[lower, upper]`.
//!
//! Everything numerical is generic over [`Real`] (`f32` or `f64`). The `*64`
//! aliases at the crate root are what the harness and the CLI use.

pub mod baselines;
pub mod dist;
pub mod error;
pub mod estimators;
pub mod interval;
pub mod linalg;
pub mod model;
pub mod scalar;
pub mod seed;
pub mod univariate;

pub use error::{Error, Result};
pub use estimators::FitResult;
pub use interval::{DecorrelatedPair, Interval, Method, ThresholdRule};
pub use model::{Covariance, Dataset, DesignSpec, NoiseBase, NoiseSpec, SplitDataset};
pub use scalar::Real;

pub type Dataset64 = Dataset<f64>;
pub type Dataset32 = Dataset<f32>;
pub type SplitDataset64 = SplitDataset<f64>;
pub type Interval64 = Interval<f64>;
pub type Interval32 = Interval<f32>;
pub type FitResult64 = FitResult<f64>;
pub type FitResult32 = FitResult<f32>;
pub type DecorrelatedPair64 = DecorrelatedPair<f64>;
