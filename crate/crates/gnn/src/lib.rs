//! SatGNN: a small message-passing network over the bipartite
//! variable/constraint graph of an ONTS model.
//!
//! Node features are standardized per graph, encoded by an affine layer with
//! a rectifier, updated by `L` rounds of convolutions (constraints first,
//! then variables) and read out by a three-layer head. Two tasks are
//! supported: feasibility classification of a candidate solution and
//! per-variable bias prediction. Gradients are computed by hand and trained
//! with Adam.

mod config;
mod net;
mod params;
mod prepared;
mod train;

use thiserror::Error;

pub use config::{Aggregation, ConvKind, SatGnnConfig, Task};
pub use net::forward;
pub use params::{ModelParams, SatGnn, TensorSpec};
pub use prepared::PreparedGraph;
pub use train::{
    accuracy, grad_check, loss, loss_and_grad, solution_weights, train, train_from, EpochRecord,
    History, Sample, Target,
};

#[derive(Debug, Error)]
pub enum GnnError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("target mismatch: {0}")]
    TargetMismatch(String),
    #[error("solution pool is empty")]
    EmptyPool,
    #[error("dataset is empty")]
    EmptyDataset,
    #[error("training diverged (non-finite loss) in epoch {epoch}")]
    Diverged { epoch: usize },
    #[error("invalid model JSON: {0}")]
    Json(#[from] serde_json::Error),
}

impl SatGnn {
    /// Per-binary-variable probabilities (bias task).
    pub fn predict_bias(&self, graph: &PreparedGraph) -> Result<Vec<f64>, GnnError> {
        if self.config.task != Task::Bias {
            return Err(GnnError::Config(
                "model was not trained for bias prediction".into(),
            ));
        }
        forward(&self.params, &self.config, graph)
    }

    /// Probability that the graph's candidate is feasible.
    pub fn predict_feasibility(&self, graph: &PreparedGraph) -> Result<f64, GnnError> {
        if self.config.task != Task::Feasibility {
            return Err(GnnError::Config(
                "model was not trained for feasibility".into(),
            ));
        }
        Ok(forward(&self.params, &self.config, graph)?[0])
    }
}
