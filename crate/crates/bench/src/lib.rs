//! Monte Carlo harness: runs interval methods over a grid of sample sizes,
//! contamination levels and noise families, and reports coverage and
//! average covering length as CSV.

pub mod config;
pub mod output;
pub mod run;

pub use config::{BenchMethod, DesignConfig, ExperimentConfig, NoiseFamily};
pub use output::{write_csv, HEADER};
pub use run::{cells, replicate_dataset, run_cell, run_grid, run_method, Cell, ExperimentRecord};

#[derive(Debug, thiserror::Error)]
pub enum BenchError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Core(#[from] robci::Error),
}
