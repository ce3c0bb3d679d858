//! Graph inputs in the form the network consumes: standardized features,
//! per-direction edge lists and degrees.

use onts_core::graph::VAR_BINARY_COLUMN;
use onts_core::BipartiteGraph;

#[derive(Debug, Clone, PartialEq)]
pub struct PreparedGraph {
    pub n_var: usize,
    pub n_con: usize,
    pub var_in: usize,
    pub con_in: usize,
    /// Row-major `n_var x var_in`, standardized per column.
    pub var_x: Vec<f64>,
    /// Row-major `n_con x con_in`, standardized per column.
    pub con_x: Vec<f64>,
    /// `(constraint, variable, weight)`.
    pub edges: Vec<(usize, usize, f64)>,
    /// The same edges as `(variable, constraint, weight)`.
    pub edges_to_var: Vec<(usize, usize, f64)>,
    pub var_deg: Vec<usize>,
    pub con_deg: Vec<usize>,
    /// Binary variable nodes in node order.
    pub binary: Vec<usize>,
}

/// Z-scores each column over the rows; a constant column is only centred.
fn standardize(rows: &[Vec<f64>], width: usize) -> Vec<f64> {
    let n = rows.len();
    let mut out = vec![0.0; n * width];
    if n == 0 {
        return out;
    }
    for c in 0..width {
        let mean = rows.iter().map(|r| r[c]).sum::<f64>() / n as f64;
        let var = rows.iter().map(|r| (r[c] - mean).powi(2)).sum::<f64>() / n as f64;
        let std = var.sqrt();
        let scale = if std > 1e-12 { 1.0 / std } else { 1.0 };
        for (i, r) in rows.iter().enumerate() {
            out[i * width + c] = (r[c] - mean) * scale;
        }
    }
    out
}

impl PreparedGraph {
    pub fn new(graph: &BipartiteGraph) -> Self {
        let var_in = graph.var_features.first().map_or(0, Vec::len);
        let con_in = graph.con_features.first().map_or(0, Vec::len);
        Self {
            n_var: graph.n_var,
            n_con: graph.n_con,
            var_in,
            con_in,
            var_x: standardize(&graph.var_features, var_in),
            con_x: standardize(&graph.con_features, con_in),
            edges: graph.edges.clone(),
            edges_to_var: graph.edges.iter().map(|&(c, v, w)| (v, c, w)).collect(),
            var_deg: graph.var_degree(),
            con_deg: graph.con_degree(),
            binary: (0..graph.n_var)
                .filter(|&v| graph.var_features[v][VAR_BINARY_COLUMN] == 1.0)
                .collect(),
        }
    }
}
