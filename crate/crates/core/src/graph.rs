//! Weighted bipartite variable/constraint graph of a [`StandardForm`].
//!
//! Constraint node `i` and variable node `j` are joined iff `A_ij != 0`, with
//! edge weight `A_ij`. Node features:
//!
//! | variable node                 | constraint node           |
//! |-------------------------------|---------------------------|
//! | objective coefficient `c_j`   | right-hand side `b_i`     |
//! | mean of nonzero `A_*j`        | mean of nonzero `A_i*`    |
//! | degree                        | degree                    |
//! | max nonzero `A_*j`            | equality flag             |
//! | min nonzero `A_*j`            |                           |
//! | binary flag                   |                           |
//! | candidate value (optional)    |                           |
//!
//! Statistics are taken over nonzero coefficients only; a node without edges
//! gets zero mean, max and min.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::CandidateSolution;
use crate::standard_form::{Sense, StandardForm};

pub const VAR_FEATURES: usize = 6;
pub const VAR_FEATURES_WITH_CANDIDATE: usize = 7;
pub const CON_FEATURES: usize = 4;
/// Column of the binary flag in the variable features.
pub const VAR_BINARY_COLUMN: usize = 5;

#[derive(Debug, Error, PartialEq)]
pub enum GraphError {
    #[error("candidate has {got} binary entries but the model has {expected} binary variables")]
    CandidateSize { expected: usize, got: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BipartiteGraph {
    pub n_var: usize,
    pub n_con: usize,
    /// `(constraint, variable, weight)`.
    pub edges: Vec<(usize, usize, f64)>,
    pub var_features: Vec<Vec<f64>>,
    pub con_features: Vec<Vec<f64>>,
}

impl BipartiteGraph {
    pub fn var_degree(&self) -> Vec<usize> {
        let mut deg = vec![0; self.n_var];
        for &(_, v, _) in &self.edges {
            deg[v] += 1;
        }
        deg
    }

    pub fn con_degree(&self) -> Vec<usize> {
        let mut deg = vec![0; self.n_con];
        for &(c, _, _) in &self.edges {
            deg[c] += 1;
        }
        deg
    }

    /// Indices of variable nodes flagged binary, in node order.
    pub fn binary_nodes(&self) -> Vec<usize> {
        (0..self.n_var)
            .filter(|&v| self.var_features[v][VAR_BINARY_COLUMN] == 1.0)
            .collect()
    }

    pub fn has_candidate(&self) -> bool {
        self.var_features
            .first()
            .is_some_and(|f| f.len() == VAR_FEATURES_WITH_CANDIDATE)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("graph serialization cannot fail")
    }

    pub fn from_json(text: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }

    fn assert_bipartite(&self) {
        for &(c, v, w) in &self.edges {
            assert!(
                c < self.n_con && v < self.n_var,
                "edge ({c}, {v}) out of range"
            );
            assert!(w != 0.0, "zero-weight edge ({c}, {v})");
        }
    }
}

/// Nonzero coefficients of one node. The mean sums them in sorted order so
/// that it does not depend on row or column order.
#[derive(Clone, Default)]
struct Stats {
    values: Vec<f64>,
}

impl Stats {
    fn add(&mut self, a: f64) {
        self.values.push(a);
    }

    fn count(&self) -> usize {
        self.values.len()
    }

    fn mean(&self) -> f64 {
        if self.values.is_empty() {
            return 0.0;
        }
        let mut sorted = self.values.clone();
        sorted.sort_by(f64::total_cmp);
        sorted.iter().sum::<f64>() / sorted.len() as f64
    }

    fn max_or_zero(&self) -> f64 {
        self.values.iter().copied().reduce(f64::max).unwrap_or(0.0)
    }

    fn min_or_zero(&self) -> f64 {
        self.values.iter().copied().reduce(f64::min).unwrap_or(0.0)
    }
}

/// Builds the bipartite graph of `sf`. With a candidate, every variable node
/// gets a seventh feature: the candidate's value for binary variables and 0
/// for continuous ones.
pub fn encode_bipartite(
    sf: &StandardForm,
    candidate: Option<&CandidateSolution>,
) -> Result<BipartiteGraph, GraphError> {
    let candidate_values = match candidate {
        Some(z) => {
            let zv = z.z();
            if zv.len() != sf.n_binary() {
                return Err(GraphError::CandidateSize {
                    expected: sf.n_binary(),
                    got: zv.len(),
                });
            }
            Some(zv)
        }
        None => None,
    };

    let mut edges = Vec::with_capacity(sf.nnz());
    let mut var_stats = vec![Stats::default(); sf.n_vars()];
    let mut con_features = Vec::with_capacity(sf.n_rows());
    for (i, row) in sf.rows.iter().enumerate() {
        let mut stats = Stats::default();
        for &(j, a) in &row.coeffs {
            if a == 0.0 {
                continue;
            }
            edges.push((i, j, a));
            stats.add(a);
            var_stats[j].add(a);
        }
        con_features.push(vec![
            row.rhs,
            stats.mean(),
            stats.count() as f64,
            if row.sense == Sense::Eq { 1.0 } else { 0.0 },
        ]);
    }

    let mut binary_seen = 0;
    let var_features = (0..sf.n_vars())
        .map(|j| {
            let st = &var_stats[j];
            let is_binary = sf.var_kinds[j].is_binary();
            let mut f = vec![
                sf.objective[j],
                st.mean(),
                st.count() as f64,
                st.max_or_zero(),
                st.min_or_zero(),
                if is_binary { 1.0 } else { 0.0 },
            ];
            if let Some(values) = &candidate_values {
                let value = if is_binary {
                    binary_seen += 1;
                    f64::from(values[binary_seen - 1])
                } else {
                    0.0
                };
                f.push(value);
            }
            f
        })
        .collect();

    let graph = BipartiteGraph {
        n_var: sf.n_vars(),
        n_con: sf.n_rows(),
        edges,
        var_features,
        con_features,
    };
    graph.assert_bipartite();
    Ok(graph)
}
