//! Dataset pipeline for SatGNN on ONTS instances: solved datasets, labeled
//! candidate augmentation, training samples and a text Gantt view. The
//! `onts` binary wraps every stage.

pub mod augment;
pub mod dataset;
pub mod gantt;
pub mod samples;

use std::path::PathBuf;

use thiserror::Error;

pub use augment::{augment_candidates, default_eta, AugmentConfig, Candidate, Source};
pub use dataset::{generate_dataset, load_dataset, DatasetConfig, Manifest};
pub use samples::{bias_sample, feasibility_samples, BiasLoss};

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("{0}")]
    Invalid(String),
    #[error("corrupt data: {0}")]
    Corrupt(String),
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("only {accepted} of {requested} instances accepted after {attempts} attempts; partial dataset in {}", dir.display())]
    AttemptCap {
        accepted: usize,
        requested: usize,
        attempts: usize,
        dir: PathBuf,
    },
    #[error("i/o error on {}: {source}", path.display())]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error(transparent)]
    CoreIo(#[from] onts_core::io::IoError),
    #[error(transparent)]
    Model(#[from] onts_core::ModelError),
    #[error(transparent)]
    Generator(#[from] onts_core::GenError),
    #[error(transparent)]
    Graph(#[from] onts_core::GraphError),
    #[error(transparent)]
    Solve(#[from] onts_solver::SolveError),
    #[error(transparent)]
    Gnn(#[from] satgnn::GnnError),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
