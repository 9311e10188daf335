//! Cell and grid execution.
//!
//! Replicate `r` of a cell draws its design from a stream keyed by
//! `(master_seed, n, r)` and its noise from a stream keyed by
//! `(master_seed, n, ε-index, noise, r)`. The method is not part of either
//! key, so every method in a cell sees the same datasets, and changing ε
//! leaves the design untouched. Replicates are aggregated in index order,
//! which makes the records independent of the thread schedule.

use std::time::Instant;

use rayon::prelude::*;
use robci::baselines::{ols_t_interval, residual_bootstrap_interval, BootstrapSpec};
use robci::interval::confidence_interval;
use robci::model::generate_with_noise;
use robci::univariate::location_interval;
use robci::{seed, Dataset64, DesignSpec, Interval64, ThresholdRule};

use crate::config::{BenchMethod, ExperimentConfig, NoiseFamily};
use crate::BenchError;

/// Stream label for the bootstrap draws of a replicate.
const BOOTSTRAP_STREAM: u64 = 0x626f_6f74; // "boot"

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentRecord {
    pub method: BenchMethod,
    pub n: usize,
    pub p: usize,
    pub epsilon: f64,
    pub noise: NoiseFamily,
    pub replicates: usize,
    pub covered: usize,
    /// `covered / (replicates − error_count)`; `None` if every replicate failed.
    pub coverage: Option<f64>,
    /// Mean length over covering, bounded intervals.
    pub avg_length_covered: Option<f64>,
    /// Covering intervals with at least one infinite endpoint.
    pub unbounded_count: usize,
    pub error_count: usize,
    pub mean_runtime_ms: f64,
    pub master_seed: u64,
}

/// Coordinates of one grid cell.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Cell {
    pub method: BenchMethod,
    pub n: usize,
    /// Position of ε in `config.epsilons`; part of the seed.
    pub epsilon_index: usize,
    pub noise: NoiseFamily,
}

impl Cell {
    pub fn epsilon(&self, config: &ExperimentConfig) -> f64 {
        config.epsilons[self.epsilon_index]
    }
}

fn design_key(master: u64, n: usize, r: usize) -> u64 {
    seed::derive(master, &[seed::DESIGN_STREAM, n as u64, r as u64])
}

fn noise_key(master: u64, n: usize, epsilon_index: usize, noise: NoiseFamily, r: usize) -> u64 {
    seed::derive(
        master,
        &[
            seed::NOISE_STREAM,
            n as u64,
            epsilon_index as u64,
            noise.seed_id(),
            r as u64,
        ],
    )
}

/// Dataset of replicate `r` (0-based) in the cell at `(n, ε-index, noise)`.
pub fn replicate_dataset(
    config: &ExperimentConfig,
    design: &DesignSpec,
    n: usize,
    epsilon_index: usize,
    noise: NoiseFamily,
    r: usize,
) -> Result<Dataset64, BenchError> {
    let eps = config.epsilons[epsilon_index];
    let spec = noise.spec(eps)?;
    let mut drng = seed::stream(design_key(config.master_seed, n, r));
    let mut nrng = seed::stream(noise_key(config.master_seed, n, epsilon_index, noise, r));
    let b = config.coefficients();
    let (d, _) = generate_with_noise(design, &spec, &b, n, &mut drng, &mut nrng)?;
    Ok(d)
}

/// Interval for the first coefficient. `key` seeds the bootstrap.
pub fn run_method(
    method: BenchMethod,
    dataset: &Dataset64,
    alpha: f64,
    key: u64,
) -> robci::Result<Interval64> {
    match method {
        BenchMethod::Alg1 => confidence_interval(dataset, 1, alpha, ThresholdRule::NonAsymptotic),
        BenchMethod::Alg1Ga => {
            confidence_interval(dataset, 1, alpha, ThresholdRule::GaussianApprox)
        }
        BenchMethod::OlsT => ols_t_interval(dataset, 1, alpha),
        BenchMethod::Rb => {
            let spec = BootstrapSpec::new(
                BootstrapSpec::DEFAULT_REPLICATES,
                seed::derive(key, &[BOOTSTRAP_STREAM]),
            )?;
            residual_bootstrap_interval(dataset, 1, alpha, &spec)
        }
        BenchMethod::QuantileLoc => {
            let x = dataset.x().column(0);
            if x.iter().any(|&v| v == 0.0) {
                return Err(robci::Error::DegenerateCovariate);
            }
            let ratios: Vec<f64> = dataset
                .y()
                .iter()
                .zip(x.iter())
                .map(|(y, x)| y / x)
                .collect();
            let iv = location_interval(&ratios, alpha)?;
            Interval64::new(iv.lower, iv.upper, alpha, method.method())
        }
    }
}

struct Outcome {
    interval: Option<Interval64>,
    ms: f64,
}

pub fn run_cell(config: &ExperimentConfig, cell: Cell) -> Result<ExperimentRecord, BenchError> {
    config.validate()?;
    if cell.epsilon_index >= config.epsilons.len() {
        return Err(BenchError::Config(format!(
            "epsilon index {} out of range",
            cell.epsilon_index
        )));
    }
    let design = config.design.spec(config.p)?;
    let truth = config.coefficients()[0];
    let outcomes: Vec<Outcome> = (0..config.replicates)
        .into_par_iter()
        .map(|r| -> Result<Outcome, BenchError> {
            let d = replicate_dataset(config, &design, cell.n, cell.epsilon_index, cell.noise, r)?;
            let key = noise_key(
                config.master_seed,
                cell.n,
                cell.epsilon_index,
                cell.noise,
                r,
            );
            let start = Instant::now();
            let res = run_method(cell.method, &d, config.alpha, key);
            let ms = if config.timing {
                start.elapsed().as_secs_f64() * 1e3
            } else {
                0.0
            };
            Ok(Outcome {
                interval: res.ok(),
                ms,
            })
        })
        .collect::<Result<_, _>>()?;

    let mut covered = 0;
    let mut errors = 0;
    let mut unbounded = 0;
    let mut length_sum = 0.0;
    let mut length_count = 0usize;
    let mut ms_sum = 0.0;
    for o in &outcomes {
        ms_sum += o.ms;
        let Some(iv) = &o.interval else {
            errors += 1;
            continue;
        };
        if iv.contains(truth) {
            covered += 1;
            match iv.length() {
                Some(l) => {
                    length_sum += l;
                    length_count += 1;
                }
                None => unbounded += 1,
            }
        }
    }
    let ok = config.replicates - errors;
    Ok(ExperimentRecord {
        method: cell.method,
        n: cell.n,
        p: config.p,
        epsilon: cell.epsilon(config),
        noise: cell.noise,
        replicates: config.replicates,
        covered,
        coverage: (ok > 0).then(|| covered as f64 / ok as f64),
        avg_length_covered: (length_count > 0).then(|| length_sum / length_count as f64),
        unbounded_count: unbounded,
        error_count: errors,
        mean_runtime_ms: ms_sum / config.replicates as f64,
        master_seed: config.master_seed,
    })
}

/// All cells of the grid, ordered by (method, n, ε, noise) in config order.
pub fn cells(config: &ExperimentConfig) -> Vec<Cell> {
    let mut out = Vec::new();
    for &method in &config.methods {
        for &n in &config.n_values {
            for epsilon_index in 0..config.epsilons.len() {
                for &noise in &config.noise_families {
                    out.push(Cell {
                        method,
                        n,
                        epsilon_index,
                        noise,
                    });
                }
            }
        }
    }
    out
}

/// Runs every cell, possibly concurrently. `progress` is called once per
/// finished cell, in completion order.
pub fn run_grid(
    config: &ExperimentConfig,
    progress: Option<&(dyn Fn(&ExperimentRecord) + Sync)>,
) -> Result<Vec<ExperimentRecord>, BenchError> {
    config.validate()?;
    cells(config)
        .into_par_iter()
        .map(|cell| {
            let rec = run_cell(config, cell)?;
            if let Some(f) = progress {
                f(&rec);
            }
            Ok(rec)
        })
        .collect()
}
