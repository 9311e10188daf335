//! Data containers, the target/nuisance split, and the synthetic generator
//! (Gaussian design with configurable covariance, contaminated noise).

pub mod io;

use ndarray::{s, Array1, Array2, Axis};
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::linalg;
use crate::scalar::Real;
use crate::seed;

/// Responses `y` and an `n × p` design `X`. No intercept is implied.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset<T> {
    y: Array1<T>,
    x: Array2<T>,
}

impl<T: Real> Dataset<T> {
    pub fn new(y: Array1<T>, x: Array2<T>) -> Result<Self> {
        let (n, p) = x.dim();
        if y.len() != n {
            return Err(Error::Dimension(format!(
                "y has {} entries but X has {n} rows",
                y.len()
            )));
        }
        if n < 2 {
            return Err(Error::InvalidArgument(format!("need n >= 2, got {n}")));
        }
        if p < 1 {
            return Err(Error::InvalidArgument("need p >= 1".into()));
        }
        if !y.iter().all(|v| v.is_finite()) {
            return Err(Error::NonFinite("y"));
        }
        if !x.iter().all(|v| v.is_finite()) {
            return Err(Error::NonFinite("X"));
        }
        Ok(Self { y, x })
    }

    pub fn y(&self) -> &Array1<T> {
        &self.y
    }

    pub fn x(&self) -> &Array2<T> {
        &self.x
    }

    pub fn n(&self) -> usize {
        self.x.nrows()
    }

    pub fn p(&self) -> usize {
        self.x.ncols()
    }

    /// Column `target_index` (1-based).
    pub fn column(&self, target_index: usize) -> Result<Array1<T>> {
        check_index(target_index, self.p())?;
        Ok(self.x.column(target_index - 1).to_owned())
    }

    /// Separates the target covariate (1-based `target_index`) from the
    /// nuisance columns, which keep their original order.
    pub fn split(&self, target_index: usize) -> Result<SplitDataset<T>> {
        let p = self.p();
        check_index(target_index, p)?;
        if p < 2 {
            return Err(Error::NoNuisance);
        }
        let j = target_index - 1;
        let x = self.x.column(j).to_owned();
        let keep: Vec<usize> = (0..p).filter(|&c| c != j).collect();
        let w = self.x.select(Axis(1), &keep);
        Ok(SplitDataset {
            y: self.y.clone(),
            x,
            w,
            target_index,
        })
    }
}

fn check_index(index: usize, p: usize) -> Result<()> {
    if index == 0 || index > p {
        Err(Error::IndexOutOfRange { index, p })
    } else {
        Ok(())
    }
}

/// `y_i = β x_i + θᵀ w_i + z_i` view of a dataset.
#[derive(Debug, Clone, PartialEq)]
pub struct SplitDataset<T> {
    pub y: Array1<T>,
    pub x: Array1<T>,
    pub w: Array2<T>,
    pub target_index: usize,
}

impl<T: Real> SplitDataset<T> {
    pub fn n(&self) -> usize {
        self.y.len()
    }
}

/// Uncontaminated part of the noise law.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NoiseBase {
    GaussianStd,
    CauchyStd,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MixtureComponent {
    pub weight: f64,
    pub mean: f64,
    pub sd: f64,
}

/// `(1 − ε)·base + ε·Q` with `Q` a finite Gaussian mixture.
#[derive(Debug, Clone, PartialEq)]
pub struct NoiseSpec {
    base: NoiseBase,
    epsilon: f64,
    contamination: Vec<MixtureComponent>,
}

impl NoiseSpec {
    pub fn new(
        base: NoiseBase,
        epsilon: f64,
        contamination: Vec<MixtureComponent>,
    ) -> Result<Self> {
        if !(0.0..1.0).contains(&epsilon) {
            return Err(Error::InvalidArgument(format!(
                "epsilon must satisfy 0 <= epsilon < 1, got {epsilon}"
            )));
        }
        if contamination.is_empty() {
            return Err(Error::InvalidArgument(
                "contamination mixture needs at least one component".into(),
            ));
        }
        let mut total = 0.0;
        for c in &contamination {
            if !(c.weight >= 0.0) || !c.mean.is_finite() || !(c.sd > 0.0) || !c.sd.is_finite() {
                return Err(Error::InvalidArgument(format!(
                    "invalid mixture component {c:?}"
                )));
            }
            total += c.weight;
        }
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidArgument(format!(
                "mixture weights sum to {total}, expected 1"
            )));
        }
        Ok(Self {
            base,
            epsilon,
            contamination,
        })
    }

    /// Outliers at `½N(10², 1) + ½N(10⁴, 1)` on top of `base`.
    pub fn far_outliers(base: NoiseBase, epsilon: f64) -> Result<Self> {
        Self::new(
            base,
            epsilon,
            vec![
                MixtureComponent {
                    weight: 0.5,
                    mean: 1e2,
                    sd: 1.0,
                },
                MixtureComponent {
                    weight: 0.5,
                    mean: 1e4,
                    sd: 1.0,
                },
            ],
        )
    }

    pub fn base(&self) -> NoiseBase {
        self.base
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn contamination(&self) -> &[MixtureComponent] {
        &self.contamination
    }

    /// One draw. Each call consumes a selector uniform, an auxiliary
    /// uniform and one standard normal, in that order.
    pub fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let select: f64 = rng.random();
        let aux: f64 = rng.random();
        let g: f64 = rng.sample(StandardNormal);
        if select < self.epsilon {
            let mut acc = 0.0;
            let last = self.contamination.len() - 1;
            for (i, c) in self.contamination.iter().enumerate() {
                acc += c.weight;
                if aux < acc || i == last {
                    return c.mean + c.sd * g;
                }
            }
            unreachable!()
        } else {
            match self.base {
                NoiseBase::GaussianStd => g,
                NoiseBase::CauchyStd => cauchy_from_uniform(aux),
            }
        }
    }
}

/// Standard Cauchy by inverse CDF.
#[inline]
pub fn cauchy_from_uniform(u: f64) -> f64 {
    (std::f64::consts::PI * (u - 0.5)).tan()
}

#[derive(Debug, Clone, PartialEq)]
pub enum Covariance {
    /// `Σ_jk = ρ^|j−k|`.
    Ar1 {
        rho: f64,
    },
    Identity,
    Explicit(Array2<f64>),
}

/// Zero-mean Gaussian design with `p` covariates.
#[derive(Debug, Clone, PartialEq)]
pub struct DesignSpec {
    p: usize,
    covariance: Covariance,
    chol: Array2<f64>,
}

impl DesignSpec {
    pub fn new(p: usize, covariance: Covariance) -> Result<Self> {
        if p == 0 {
            return Err(Error::InvalidArgument("design needs p >= 1".into()));
        }
        let sigma = match &covariance {
            Covariance::Ar1 { rho } => {
                if !(rho.abs() < 1.0) {
                    return Err(Error::InvalidArgument(format!(
                        "AR(1) correlation must lie in (-1, 1), got {rho}"
                    )));
                }
                Array2::from_shape_fn((p, p), |(j, k)| rho.powi((j as i32 - k as i32).abs()))
            }
            Covariance::Identity => Array2::eye(p),
            Covariance::Explicit(m) => {
                if m.dim() != (p, p) {
                    return Err(Error::Dimension(format!(
                        "covariance is {:?}, expected {p} x {p}",
                        m.dim()
                    )));
                }
                m.clone()
            }
        };
        let chol = linalg::cholesky(sigma.view())?;
        Ok(Self {
            p,
            covariance,
            chol,
        })
    }

    pub fn ar1(p: usize, rho: f64) -> Result<Self> {
        Self::new(p, Covariance::Ar1 { rho })
    }

    pub fn p(&self) -> usize {
        self.p
    }

    pub fn covariance(&self) -> &Covariance {
        &self.covariance
    }

    /// Lower Cholesky factor of the covariance.
    pub fn cholesky(&self) -> &Array2<f64> {
        &self.chol
    }
}

/// `n` iid rows `L z`, `z ~ N(0, I_p)` drawn row by row.
pub fn sample_design<T: Real, R: Rng + ?Sized>(
    spec: &DesignSpec,
    n: usize,
    rng: &mut R,
) -> Array2<T> {
    let p = spec.p;
    let l = &spec.chol;
    let mut out = Array2::zeros((n, p));
    let mut z = vec![0.0f64; p];
    for i in 0..n {
        for zj in z.iter_mut() {
            *zj = rng.sample(StandardNormal);
        }
        for j in 0..p {
            let v: f64 = (0..=j).map(|k| l[[j, k]] * z[k]).sum();
            out[[i, j]] = T::lit(v);
        }
    }
    out
}

pub fn sample_noise<T: Real, R: Rng + ?Sized>(
    spec: &NoiseSpec,
    n: usize,
    rng: &mut R,
) -> Array1<T> {
    Array1::from_iter((0..n).map(|_| T::lit(spec.draw(rng))))
}

/// `y = X b + z` with the design and the noise drawn from the two given
/// streams. Returns the dataset and the noise vector.
pub fn generate_with_noise<T: Real, R1: Rng + ?Sized, R2: Rng + ?Sized>(
    design: &DesignSpec,
    noise: &NoiseSpec,
    b: &[f64],
    n: usize,
    design_rng: &mut R1,
    noise_rng: &mut R2,
) -> Result<(Dataset<T>, Array1<T>)> {
    if b.len() != design.p {
        return Err(Error::Dimension(format!(
            "b has length {}, design has p = {}",
            b.len(),
            design.p
        )));
    }
    let x: Array2<T> = sample_design(design, n, design_rng);
    let z: Array1<T> = sample_noise(noise, n, noise_rng);
    let bt: Array1<T> = b.iter().map(|&v| T::lit(v)).collect();
    let y = x.dot(&bt) + &z;
    Ok((Dataset::new(y, x)?, z))
}

/// [`generate_with_noise`] with both streams derived from `seed`.
pub fn generate_dataset<T: Real>(
    design: &DesignSpec,
    noise: &NoiseSpec,
    b: &[f64],
    n: usize,
    seed: u64,
) -> Result<Dataset<T>> {
    let mut drng = seed::stream(seed::derive(seed, &[seed::DESIGN_STREAM]));
    let mut nrng = seed::stream(seed::derive(seed, &[seed::NOISE_STREAM]));
    generate_with_noise(design, noise, b, n, &mut drng, &mut nrng).map(|(d, _)| d)
}

/// Sample covariance `(1/n) XᵀX` (the design is zero-mean by construction).
pub fn second_moment<T: Real>(x: &Array2<T>) -> Array2<T> {
    let n = T::from_usize(x.nrows()).unwrap_or(T::one());
    x.t().dot(x).mapv(|v| v / n)
}

/// Drops the first `k` rows. Used to build nested samples.
pub fn head<T: Real>(d: &Dataset<T>, k: usize) -> Result<Dataset<T>> {
    Dataset::new(
        d.y.slice(s![..k]).to_owned(),
        d.x.slice(s![..k, ..]).to_owned(),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    #[test]
    fn split_first_and_second_column() {
        let d = Dataset::new(array![0.0, 0.0], array![[1.0, 10.0], [2.0, 20.0]]).unwrap();
        let s1 = d.split(1).unwrap();
        assert_eq!(s1.x, array![1.0, 2.0]);
        assert_eq!(s1.w, array![[10.0], [20.0]]);
        let s2 = d.split(2).unwrap();
        assert_eq!(s2.x, array![10.0, 20.0]);
        assert_eq!(s2.w, array![[1.0], [2.0]]);
    }

    #[test]
    fn split_errors() {
        let d = Dataset::new(array![0.0, 0.0], array![[1.0], [2.0]]).unwrap();
        assert_eq!(d.split(1).unwrap_err(), Error::NoNuisance);
        let d2 = Dataset::new(array![0.0, 0.0], array![[1.0, 3.0], [2.0, 4.0]]).unwrap();
        assert!(matches!(d2.split(0), Err(Error::IndexOutOfRange { .. })));
        assert!(matches!(d2.split(3), Err(Error::IndexOutOfRange { .. })));
    }

    #[test]
    fn dataset_validation() {
        assert!(Dataset::new(array![1.0], array![[1.0]]).is_err());
        assert!(Dataset::new(array![1.0, 2.0], array![[1.0], [2.0], [3.0]]).is_err());
        assert!(Dataset::new(array![1.0, f64::NAN], array![[1.0], [2.0]]).is_err());
    }

    #[test]
    fn ar1_cholesky_reconstructs_sigma() {
        let d = DesignSpec::ar1(3, 0.6).unwrap();
        let l = d.cholesky();
        let sigma = l.dot(&l.t());
        let want = array![[1.0, 0.6, 0.36], [0.6, 1.0, 0.6], [0.36, 0.6, 1.0]];
        for (a, b) in sigma.iter().zip(want.iter()) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn explicit_covariance_must_be_pd() {
        let bad = array![[1.0, 2.0], [2.0, 1.0]];
        assert_eq!(
            DesignSpec::new(2, Covariance::Explicit(bad)).unwrap_err(),
            Error::NotPositiveDefinite
        );
        assert!(DesignSpec::ar1(2, 1.0).is_err());
    }

    #[test]
    fn empty_design_has_p_columns() {
        let d = DesignSpec::new(4, Covariance::Identity).unwrap();
        let x: Array2<f64> = sample_design(&d, 0, &mut seed::stream(1));
        assert_eq!(x.dim(), (0, 4));
    }

    #[test]
    fn noise_spec_validation() {
        assert!(NoiseSpec::far_outliers(NoiseBase::GaussianStd, 1.0 - 1e-12).is_ok());
        assert!(NoiseSpec::far_outliers(NoiseBase::GaussianStd, 1.0).is_err());
        assert!(NoiseSpec::far_outliers(NoiseBase::GaussianStd, -0.1).is_err());
        let bad_weights = vec![
            MixtureComponent {
                weight: 0.5,
                mean: 0.0,
                sd: 1.0,
            },
            MixtureComponent {
                weight: 0.6,
                mean: 0.0,
                sd: 1.0,
            },
        ];
        assert!(NoiseSpec::new(NoiseBase::GaussianStd, 0.1, bad_weights).is_err());
        let bad_sd = vec![MixtureComponent {
            weight: 1.0,
            mean: 0.0,
            sd: 0.0,
        }];
        assert!(NoiseSpec::new(NoiseBase::GaussianStd, 0.1, bad_sd).is_err());
    }

    #[test]
    fn cauchy_inverse_cdf_quartiles() {
        assert!((cauchy_from_uniform(0.75) - 1.0).abs() < 1e-12);
        assert!((cauchy_from_uniform(0.25) + 1.0).abs() < 1e-12);
        assert_eq!(cauchy_from_uniform(0.5), 0.0);
    }
}
