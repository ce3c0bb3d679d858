//! Training samples for SatGNN built from instances, pools and candidates.

use std::fmt;
use std::str::FromStr;

use onts_core::{build_standard_form, encode_bipartite, CandidateSolution, Instance};
use onts_solver::SolutionPool;
use satgnn::{solution_weights, PreparedGraph, Sample, Target};

use crate::augment::Candidate;
use crate::PipelineError;

/// Bias-task target: the best solution only, or the whole pool weighted by
/// a softmax over QoS.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BiasLoss {
    Best,
    Pool,
}

impl BiasLoss {
    pub fn as_str(self) -> &'static str {
        match self {
            BiasLoss::Best => "opt-b",
            BiasLoss::Pool => "opt-m",
        }
    }
}

impl fmt::Display for BiasLoss {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for BiasLoss {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "opt-b" => Ok(BiasLoss::Best),
            "opt-m" => Ok(BiasLoss::Pool),
            _ => Err(format!("unknown loss `{s}` (expected opt-b or opt-m)")),
        }
    }
}

/// One sample per candidate, with the candidate as the seventh variable
/// feature.
pub fn feasibility_samples(
    inst: &Instance,
    cands: &[Candidate],
) -> Result<Vec<Sample>, PipelineError> {
    let sf = build_standard_form(inst);
    cands
        .iter()
        .map(|c| {
            let sol = CandidateSolution::from_z(inst.n_jobs(), inst.horizon(), &c.z)?;
            let graph = encode_bipartite(&sf, Some(&sol))?;
            Ok(Sample {
                graph: PreparedGraph::new(&graph),
                target: Target::Feasible(if c.feasible { 1.0 } else { 0.0 }),
            })
        })
        .collect()
}

pub fn bias_sample(
    inst: &Instance,
    pool: &SolutionPool,
    loss: BiasLoss,
) -> Result<Sample, PipelineError> {
    if pool.is_empty() {
        return Err(PipelineError::Invalid(
            "bias samples need a nonempty pool".into(),
        ));
    }
    let graph = encode_bipartite(&build_standard_form(inst), None)?;
    let target = match loss {
        BiasLoss::Best => Target::Best(pool.solutions[0].solution.z()),
        BiasLoss::Pool => {
            let qos: Vec<f64> = pool.solutions.iter().map(|e| e.qos).collect();
            Target::Pool {
                solutions: pool.solutions.iter().map(|e| e.solution.z()).collect(),
                weights: solution_weights(&qos)?,
            }
        }
    };
    Ok(Sample {
        graph: PreparedGraph::new(&graph),
        target,
    })
}
