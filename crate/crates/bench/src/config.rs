//! Experiment configuration, deserializable from JSON.

use std::fmt;
use std::str::FromStr;

use ndarray::Array2;
use robci::{Covariance, DesignSpec, Method, NoiseBase, NoiseSpec};
use serde::{Deserialize, Serialize};

use crate::BenchError;

/// Methods the harness can run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum BenchMethod {
    #[serde(rename = "alg1")]
    Alg1,
    #[serde(rename = "alg1-ga")]
    Alg1Ga,
    #[serde(rename = "ols-t")]
    OlsT,
    #[serde(rename = "rb")]
    Rb,
    /// Location interval on the ratios `y_i / x_i1`. Valid when every other
    /// coefficient is zero, which is the harness default.
    #[serde(rename = "quantile-loc")]
    QuantileLoc,
}

impl BenchMethod {
    pub const ALL: [BenchMethod; 5] = [
        BenchMethod::Alg1,
        BenchMethod::Alg1Ga,
        BenchMethod::OlsT,
        BenchMethod::Rb,
        BenchMethod::QuantileLoc,
    ];

    pub fn method(self) -> Method {
        match self {
            BenchMethod::Alg1 => Method::Alg1,
            BenchMethod::Alg1Ga => Method::Alg1Ga,
            BenchMethod::OlsT => Method::OlsT,
            BenchMethod::Rb => Method::ResidualBootstrap,
            BenchMethod::QuantileLoc => Method::QuantileLocation,
        }
    }

    pub fn tag(self) -> &'static str {
        self.method().tag()
    }

    /// Everything except `quantile-loc` fits the full regression.
    pub fn is_regression(self) -> bool {
        self != BenchMethod::QuantileLoc
    }
}

impl fmt::Display for BenchMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

impl FromStr for BenchMethod {
    type Err = BenchError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        BenchMethod::ALL
            .into_iter()
            .find(|m| m.tag() == s)
            .ok_or_else(|| {
                BenchError::Config(format!(
                    "unknown method '{s}' (expected alg1, alg1-ga, ols-t, rb or quantile-loc)"
                ))
            })
    }
}

/// Noise presets: `(1 − ε)·base + ε·(½N(10², 1) + ½N(10⁴, 1))`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NoiseFamily {
    Gaussian,
    Cauchy,
}

impl NoiseFamily {
    pub fn tag(self) -> &'static str {
        match self {
            NoiseFamily::Gaussian => "gaussian",
            NoiseFamily::Cauchy => "cauchy",
        }
    }

    /// Stable id mixed into seeds.
    pub fn seed_id(self) -> u64 {
        match self {
            NoiseFamily::Gaussian => 1,
            NoiseFamily::Cauchy => 2,
        }
    }

    pub fn spec(self, epsilon: f64) -> robci::Result<NoiseSpec> {
        let base = match self {
            NoiseFamily::Gaussian => NoiseBase::GaussianStd,
            NoiseFamily::Cauchy => NoiseBase::CauchyStd,
        };
        NoiseSpec::far_outliers(base, epsilon)
    }
}

impl fmt::Display for NoiseFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

impl FromStr for NoiseFamily {
    type Err = BenchError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "gaussian" => Ok(NoiseFamily::Gaussian),
            "cauchy" => Ok(NoiseFamily::Cauchy),
            _ => Err(BenchError::Config(format!(
                "unknown noise family '{s}' (expected gaussian or cauchy)"
            ))),
        }
    }
}

/// Covariance of the Gaussian design. In JSON: `{"ar1": {"rho": 0.6}}`,
/// `"identity"`, or `{"explicit": [[...], ...]}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DesignConfig {
    Ar1 { rho: f64 },
    Identity,
    Explicit(Vec<Vec<f64>>),
}

impl Default for DesignConfig {
    fn default() -> Self {
        DesignConfig::Ar1 { rho: 0.6 }
    }
}

impl DesignConfig {
    pub fn spec(&self, p: usize) -> Result<DesignSpec, BenchError> {
        let cov = match self {
            DesignConfig::Ar1 { rho } => Covariance::Ar1 { rho: *rho },
            DesignConfig::Identity => Covariance::Identity,
            DesignConfig::Explicit(rows) => {
                if rows.len() != p || rows.iter().any(|r| r.len() != p) {
                    return Err(BenchError::Config(format!(
                        "explicit covariance must be {p} x {p}"
                    )));
                }
                let flat: Vec<f64> = rows.iter().flatten().copied().collect();
                Covariance::Explicit(Array2::from_shape_vec((p, p), flat).expect("checked shape"))
            }
        };
        Ok(DesignSpec::new(p, cov)?)
    }
}

fn default_replicates() -> usize {
    500
}

fn default_alpha() -> f64 {
    0.05
}

fn default_timing() -> bool {
    true
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub methods: Vec<BenchMethod>,
    pub n_values: Vec<usize>,
    pub p: usize,
    pub epsilons: Vec<f64>,
    pub noise_families: Vec<NoiseFamily>,
    #[serde(default = "default_replicates")]
    pub replicates: usize,
    #[serde(default = "default_alpha")]
    pub alpha: f64,
    pub master_seed: u64,
    #[serde(default)]
    pub design: DesignConfig,
    /// True coefficients; zero vector when absent.
    #[serde(default)]
    pub b: Option<Vec<f64>>,
    /// Record wall-clock runtimes. With `false` the runtime column is 0 and
    /// the output depends on the configuration alone.
    #[serde(default = "default_timing")]
    pub timing: bool,
}

impl ExperimentConfig {
    /// A config with the documented defaults for every optional field.
    pub fn new(
        methods: Vec<BenchMethod>,
        n_values: Vec<usize>,
        p: usize,
        epsilons: Vec<f64>,
        noise_families: Vec<NoiseFamily>,
        master_seed: u64,
    ) -> Self {
        Self {
            methods,
            n_values,
            p,
            epsilons,
            noise_families,
            replicates: default_replicates(),
            alpha: default_alpha(),
            master_seed,
            design: DesignConfig::default(),
            b: None,
            timing: true,
        }
    }

    /// The grid used for the published figures, restricted to the methods
    /// implemented here.
    pub fn paper_default(master_seed: u64) -> Self {
        Self::new(
            vec![
                BenchMethod::Alg1,
                BenchMethod::Alg1Ga,
                BenchMethod::OlsT,
                BenchMethod::Rb,
            ],
            vec![200, 1000],
            20,
            (0..=8).map(|i| i as f64 / 10.0).collect(),
            vec![NoiseFamily::Gaussian, NoiseFamily::Cauchy],
            master_seed,
        )
    }

    pub fn from_json(text: &str) -> Result<Self, BenchError> {
        let cfg: Self =
            serde_json::from_str(text).map_err(|e| BenchError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn coefficients(&self) -> Vec<f64> {
        self.b.clone().unwrap_or_else(|| vec![0.0; self.p])
    }

    pub fn validate(&self) -> Result<(), BenchError> {
        let bad = |m: String| Err(BenchError::Config(m));
        if self.replicates < 1 {
            return bad("replicates must be at least 1".into());
        }
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return bad(format!("alpha must lie in (0, 1), got {}", self.alpha));
        }
        if self.p < 1 {
            return bad("p must be at least 1".into());
        }
        if self.p < 2 && self.methods.iter().any(|m| m.is_regression()) {
            return bad("regression methods need p >= 2".into());
        }
        for &e in &self.epsilons {
            if !(0.0..1.0).contains(&e) {
                return bad(format!(
                    "every epsilon must satisfy 0 <= epsilon < 1, got {e}"
                ));
            }
        }
        for &n in &self.n_values {
            if n < 2 {
                return bad(format!("n must be at least 2, got {n}"));
            }
        }
        if let Some(b) = &self.b {
            if b.len() != self.p {
                return bad(format!("b has length {}, expected p = {}", b.len(), self.p));
            }
            if b.iter().any(|v| !v.is_finite()) {
                return bad("b must be finite".into());
            }
        }
        self.design.spec(self.p)?;
        Ok(())
    }
}
