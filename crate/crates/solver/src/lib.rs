//! Exact desk-scale solver for ONTS instances.
//!
//! [`solve_bb`] is a depth-first branch-and-bound over the activation
//! variables with forward propagation of every constraint family, a
//! combinatorial priority bound and a bounded solution pool. It supports
//! variable fixings, a Hamming trust region and warm-start hints.
//! [`brute_force`] enumerates every schedule and serves as an oracle.

mod bb;
mod brute;
mod partial;
mod pool;

use thiserror::Error;

pub use bb::{solve_bb, SolveOptions, TrustRegion};
pub use brute::{brute_force, BRUTE_FORCE_MAX_CELLS};
pub use partial::PartialAssignment;
pub use pool::{PoolEntry, SolutionPool, Status};

#[derive(Debug, Error)]
pub enum SolveError {
    #[error("{what} index {index} out of range for {len} binary variables")]
    IndexOutOfRange {
        what: String,
        index: usize,
        len: usize,
    },
    #[error("index {0} assigned two different values")]
    Conflict(usize),
    #[error("index {index} has non-binary value {value}")]
    NotBinary { index: usize, value: u8 },
    #[error("brute force limited to {max} activation cells, instance has {cells}")]
    TooLarge { cells: usize, max: usize },
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error(transparent)]
    Model(#[from] onts_core::ModelError),
}

impl From<onts_core::io::IoError> for SolveError {
    fn from(e: onts_core::io::IoError) -> Self {
        match e {
            onts_core::io::IoError::Csv { line, msg } => SolveError::Parse { line, msg },
            other => SolveError::Parse {
                line: 0,
                msg: other.to_string(),
            },
        }
    }
}
