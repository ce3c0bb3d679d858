use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ConvKind {
    Gcn,
    Sage,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Aggregation {
    Mean,
    Max,
    Sum,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Task {
    /// One probability per graph: is the candidate feasible?
    Feasibility,
    /// One probability per binary variable: its value in good solutions.
    Bias,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SatGnnConfig {
    /// Hidden width.
    pub d: usize,
    /// Number of message-passing layers.
    pub layers: usize,
    pub conv_kind: ConvKind,
    /// Neighbor aggregation of SAGE convolutions; GCN always sums.
    pub aggregation: Aggregation,
    pub share_conv_params: bool,
    pub task: Task,
    pub learning_rate: f64,
    pub max_epochs: usize,
    pub seed: u64,
    /// Graphs per optimizer step.
    pub batch_size: usize,
    /// Divide GCN messages by `sqrt(deg(u) deg(v))`.
    pub gcn_normalize: bool,
}

impl SatGnnConfig {
    /// Feasibility classifier: one GCN layer, width 8.
    pub fn feasibility() -> Self {
        Self {
            d: 8,
            layers: 1,
            conv_kind: ConvKind::Gcn,
            aggregation: Aggregation::Sum,
            share_conv_params: false,
            task: Task::Feasibility,
            learning_rate: 1e-3,
            max_epochs: 200,
            seed: 0,
            batch_size: 1,
            gcn_normalize: true,
        }
    }

    /// Bias predictor: two shared SAGE layers, width 16.
    pub fn bias() -> Self {
        Self {
            d: 16,
            layers: 2,
            conv_kind: ConvKind::Sage,
            aggregation: Aggregation::Mean,
            share_conv_params: true,
            task: Task::Bias,
            learning_rate: 1e-2,
            max_epochs: 100,
            seed: 0,
            batch_size: 4,
            gcn_normalize: true,
        }
    }

    pub fn validate(&self) -> Result<(), String> {
        if self.d == 0 {
            return Err("hidden width d must be at least 1".into());
        }
        if self.layers == 0 {
            return Err("layer count must be at least 1".into());
        }
        if self.batch_size == 0 {
            return Err("batch size must be at least 1".into());
        }
        if !(self.learning_rate.is_finite() && self.learning_rate >= 0.0) {
            return Err(format!("invalid learning rate {}", self.learning_rate));
        }
        Ok(())
    }

    /// Variable-node input width for this task.
    pub fn var_inputs(&self) -> usize {
        match self.task {
            Task::Feasibility => onts_core::graph::VAR_FEATURES_WITH_CANDIDATE,
            Task::Bias => onts_core::graph::VAR_FEATURES,
        }
    }
}
