//! GNN-guided matheuristics.
//!
//! A bias model predicts, for every binary variable, the probability that it
//! is 1 in a good solution. The confidence `max(p, 1 - p)` ranks the
//! variables; the `N` most confident rounded predictions form a partial
//! solution, which is then used in one of three ways:
//!
//! * [`Mode::Warm`]: as a branching hint. The search stays exact.
//! * [`Mode::Fix`]: fixed outright, shrinking the search.
//! * [`Mode::Trust`]: as the centre of a Hamming ball of radius `delta`.
//!   With `delta = 0` this is the same as fixing.

use std::fmt;
use std::str::FromStr;

use onts_core::{build_standard_form, encode_bipartite, Instance};
use onts_solver::{
    solve_bb, PartialAssignment, SolutionPool, SolveError, SolveOptions, Status, TrustRegion,
};
use satgnn::{GnnError, PreparedGraph, SatGnn};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum HeuristicError {
    #[error("probability {value} at index {index} is outside (0, 1)")]
    Probability { index: usize, value: f64 },
    #[error("partial solution size {n} exceeds the {len} binary variables")]
    PartialSize { n: usize, len: usize },
    #[error("model predicts {got} values but the instance has {expected} binary variables")]
    PredictionSize { expected: usize, got: usize },
    #[error(transparent)]
    Model(#[from] GnnError),
    #[error(transparent)]
    Solve(#[from] SolveError),
}

fn check_probs(probs: &[f64]) -> Result<(), HeuristicError> {
    match probs.iter().position(|&p| !(p > 0.0 && p < 1.0)) {
        Some(index) => Err(HeuristicError::Probability {
            index,
            value: probs[index],
        }),
        None => Ok(()),
    }
}

/// `max(p, 1 - p)` per entry.
pub fn confidence(probs: &[f64]) -> Result<Vec<f64>, HeuristicError> {
    check_probs(probs)?;
    Ok(probs
        .iter()
        .map(|&p| if p >= 0.5 { p } else { 1.0 - p })
        .collect())
}

/// Most probable value: 1 iff `p >= 0.5`.
pub fn round_prediction(probs: &[f64]) -> Vec<u8> {
    probs.iter().map(|&p| u8::from(p >= 0.5)).collect()
}

/// Indices sorted by descending confidence, ties by ascending index.
pub fn confidence_order(probs: &[f64]) -> Result<Vec<usize>, HeuristicError> {
    let kappa = confidence(probs)?;
    let mut order: Vec<usize> = (0..probs.len()).collect();
    order.sort_by(|&a, &b| kappa[b].total_cmp(&kappa[a]).then(a.cmp(&b)));
    Ok(order)
}

/// Rounded predictions on the `n` most confident indices.
pub fn partial_solution(probs: &[f64], n: usize) -> Result<PartialAssignment, HeuristicError> {
    if n > probs.len() {
        return Err(HeuristicError::PartialSize {
            n,
            len: probs.len(),
        });
    }
    let order = confidence_order(probs)?;
    let rounded = round_prediction(probs);
    Ok(PartialAssignment::from_pairs(
        order[..n].iter().map(|&k| (k, rounded[k])),
    )?)
}

/// `floor(0.2 * 2 J T)`.
pub fn default_partial_size(inst: &Instance) -> usize {
    inst.n_binary() / 5
}

pub const DEFAULT_DELTA: usize = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Warm,
    Fix,
    Trust,
}

impl Mode {
    pub fn as_str(self) -> &'static str {
        match self {
            Mode::Warm => "warm",
            Mode::Fix => "fix",
            Mode::Trust => "trust",
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Mode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "warm" => Ok(Mode::Warm),
            "fix" => Ok(Mode::Fix),
            "trust" => Ok(Mode::Trust),
            _ => Err(format!("unknown mode `{s}` (expected warm, fix or trust)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct HeuristicOptions {
    pub mode: Mode,
    /// Partial solution size; `None` uses [`default_partial_size`].
    pub n: Option<usize>,
    pub delta: usize,
    /// Pool size, limits and any user fixings. The heuristic adds its own
    /// hint, fixings or trust region on top.
    pub solve: SolveOptions,
}

impl HeuristicOptions {
    pub fn new(mode: Mode) -> Self {
        Self {
            mode,
            n: None,
            delta: DEFAULT_DELTA,
            solve: SolveOptions::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct HeuristicRun {
    pub pool: SolutionPool,
    pub partial: PartialAssignment,
    /// The restricted problem (fixings or trust region) has no solution.
    /// The instance itself may still be feasible.
    pub restricted_infeasible: bool,
}

/// Bias predictions of `model` for the binary variables of `inst`.
pub fn predict(inst: &Instance, model: &SatGnn) -> Result<Vec<f64>, HeuristicError> {
    let sf = build_standard_form(inst);
    let graph = encode_bipartite(&sf, None).expect("no candidate, so no size mismatch");
    let probs = model.predict_bias(&PreparedGraph::new(&graph))?;
    if probs.len() != inst.n_binary() {
        return Err(HeuristicError::PredictionSize {
            expected: inst.n_binary(),
            got: probs.len(),
        });
    }
    Ok(probs)
}

/// Runs the heuristic from given probabilities.
pub fn run_with_probs(
    inst: &Instance,
    probs: &[f64],
    opts: &HeuristicOptions,
) -> Result<HeuristicRun, HeuristicError> {
    if probs.len() != inst.n_binary() {
        return Err(HeuristicError::PredictionSize {
            expected: inst.n_binary(),
            got: probs.len(),
        });
    }
    let n = opts.n.unwrap_or_else(|| default_partial_size(inst));
    let partial = partial_solution(probs, n)?;
    let mut solve = opts.solve.clone();
    match opts.mode {
        Mode::Warm => solve.warm_hint = Some(partial.clone()),
        Mode::Fix => {
            for (k, v) in partial.iter() {
                solve.fixings.insert(k, v)?;
            }
        }
        Mode::Trust => {
            solve.trust = Some(TrustRegion {
                center: partial.clone(),
                delta: opts.delta,
            })
        }
    }
    let pool = solve_bb(inst, &solve)?;
    let restricted_infeasible = opts.mode != Mode::Warm && pool.status == Status::Infeasible;
    Ok(HeuristicRun {
        pool,
        partial,
        restricted_infeasible,
    })
}

/// Predicts with `model`, then runs the heuristic.
pub fn run_heuristic(
    inst: &Instance,
    model: &SatGnn,
    opts: &HeuristicOptions,
) -> Result<HeuristicRun, HeuristicError> {
    let probs = predict(inst, model)?;
    run_with_probs(inst, &probs, opts)
}
