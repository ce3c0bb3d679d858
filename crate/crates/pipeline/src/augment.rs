//! Labeled candidate solutions for feasibility training.
//!
//! Besides the pool itself (all feasible), two sets are sampled: uniform
//! random vectors over `{0,1}^(2JT)` and neighbours of pool solutions with
//! `k ~ U(1, eta)` distinct positions flipped. Every label comes from the
//! feasibility checker.

use std::fmt::{self, Write as _};
use std::str::FromStr;

use onts_core::io::{bits_from_str, bits_to_string, read_csv};
use onts_core::{check_feasibility, CandidateSolution, Instance};
use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Deserialize;

use crate::PipelineError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Source {
    Pool,
    Random,
    Neighbor,
}

impl Source {
    pub fn as_str(self) -> &'static str {
        match self {
            Source::Pool => "pool",
            Source::Random => "random",
            Source::Neighbor => "neighbor",
        }
    }
}

impl fmt::Display for Source {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Source {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "pool" => Ok(Source::Pool),
            "random" => Ok(Source::Random),
            "neighbor" => Ok(Source::Neighbor),
            _ => Err(format!("unknown candidate source `{s}`")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Candidate {
    pub z: Vec<u8>,
    pub feasible: bool,
    pub source: Source,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AugmentConfig {
    pub n_random: usize,
    pub n_neighbor: usize,
    /// Largest number of flips; `None` uses [`default_eta`].
    pub eta: Option<usize>,
    pub seed: u64,
}

/// `max(1, floor(0.05 * 2 J T))`.
pub fn default_eta(inst: &Instance) -> usize {
    (inst.n_binary() / 20).max(1)
}

fn label(inst: &Instance, z: &[u8]) -> Result<bool, PipelineError> {
    let sol = CandidateSolution::from_z(inst.n_jobs(), inst.horizon(), z)?;
    Ok(check_feasibility(inst, &sol)?.feasible())
}

/// The pool members (label 1) followed by `n_random` uniform and
/// `n_neighbor` flipped candidates.
pub fn augment_candidates(
    inst: &Instance,
    pool: &[Vec<u8>],
    cfg: &AugmentConfig,
) -> Result<Vec<Candidate>, PipelineError> {
    let nb = inst.n_binary();
    let eta = cfg.eta.unwrap_or_else(|| default_eta(inst));
    if eta == 0 {
        return Err(PipelineError::Invalid("eta must be at least 1".into()));
    }
    if pool.is_empty() && cfg.n_neighbor > 0 {
        return Err(PipelineError::Invalid(
            "neighbour candidates need a nonempty pool".into(),
        ));
    }
    let eta = eta.min(nb);
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut out = Vec::with_capacity(pool.len() + cfg.n_random + cfg.n_neighbor);
    for z in pool {
        let feasible = label(inst, z)?;
        if !feasible {
            return Err(PipelineError::Corrupt(
                "pool contains an infeasible solution".into(),
            ));
        }
        out.push(Candidate {
            z: z.clone(),
            feasible,
            source: Source::Pool,
        });
    }
    for _ in 0..cfg.n_random {
        let z: Vec<u8> = (0..nb).map(|_| rng.gen_range(0..=1)).collect();
        let feasible = label(inst, &z)?;
        out.push(Candidate {
            z,
            feasible,
            source: Source::Random,
        });
    }
    for _ in 0..cfg.n_neighbor {
        let mut z = pool[rng.gen_range(0..pool.len())].clone();
        let k = rng.gen_range(1..=eta);
        for i in sample(&mut rng, nb, k) {
            z[i] ^= 1;
        }
        let feasible = label(inst, &z)?;
        out.push(Candidate {
            z,
            feasible,
            source: Source::Neighbor,
        });
    }
    Ok(out)
}

/// Header `source,label,z` with `z` as a `0`/`1` string.
pub fn candidates_to_csv(cands: &[Candidate]) -> String {
    let mut out = String::from("source,label,z\n");
    for c in cands {
        let bits = bits_to_string(&c.z);
        let _ = writeln!(out, "{},{},{}", c.source, u8::from(c.feasible), bits);
    }
    out
}

/// Parses [`candidates_to_csv`] output; every label is re-checked against
/// `inst`.
pub fn candidates_from_csv(text: &str, inst: &Instance) -> Result<Vec<Candidate>, PipelineError> {
    #[derive(Deserialize)]
    struct Row {
        source: String,
        label: u8,
        z: String,
    }
    let mut out = Vec::new();
    for (line, row) in read_csv::<Row>(text, &["source", "label", "z"])? {
        let err = |msg: String| PipelineError::Parse { line, msg };
        let source: Source = row.source.parse().map_err(err)?;
        let feasible = match row.label {
            0 => false,
            1 => true,
            v => return Err(err(format!("label must be 0 or 1, found {v}"))),
        };
        let z = bits_from_str(&row.z).ok_or_else(|| err("z must be a 0/1 string".into()))?;
        if z.len() != inst.n_binary() {
            return Err(err(format!(
                "z has {} entries, instance has {}",
                z.len(),
                inst.n_binary()
            )));
        }
        if label(inst, &z)? != feasible {
            return Err(PipelineError::Corrupt(format!(
                "line {line}: stored label is wrong"
            )));
        }
        out.push(Candidate {
            z,
            feasible,
            source,
        });
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct LabelBalance {
    pub feasible: usize,
    pub infeasible: usize,
}

/// Feasible and infeasible counts for one source, or all if `None`.
pub fn label_balance(cands: &[Candidate], source: Option<Source>) -> LabelBalance {
    let mut b = LabelBalance::default();
    for c in cands
        .iter()
        .filter(|c| source.is_none_or(|s| c.source == s))
    {
        if c.feasible {
            b.feasible += 1;
        } else {
            b.infeasible += 1;
        }
    }
    b
}
