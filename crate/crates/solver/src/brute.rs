//! Exhaustive enumeration, the ground truth for small instances.

use onts_core::{check_feasibility, qos, BinaryMatrix, CandidateSolution, Instance};

use crate::pool::{Collector, PoolEntry, SolutionPool, Status};
use crate::SolveError;

/// Largest `J T` accepted by [`brute_force`].
pub const BRUTE_FORCE_MAX_CELLS: usize = 20;

/// Enumerates all `2^(J T)` schedules (mask bit `k` is `x_{k / T, k % T}`),
/// keeping the `pool_size` best feasible ones. Equal QoS keeps enumeration
/// order.
pub fn brute_force(inst: &Instance, pool_size: usize) -> Result<SolutionPool, SolveError> {
    let (n_jobs, horizon) = (inst.n_jobs(), inst.horizon());
    let cells = n_jobs * horizon;
    if cells > BRUTE_FORCE_MAX_CELLS {
        return Err(SolveError::TooLarge {
            cells,
            max: BRUTE_FORCE_MAX_CELLS,
        });
    }
    let mut collector = Collector::new(pool_size);
    for mask in 0u64..(1u64 << cells) {
        let data = (0..cells).map(|k| ((mask >> k) & 1) as u8).collect();
        let x = BinaryMatrix::from_vec(n_jobs, horizon, data)?;
        let solution = CandidateSolution::from_x(x);
        if check_feasibility(inst, &solution)?.feasible() {
            let value = qos(inst, &solution.x);
            collector.offer(PoolEntry {
                solution,
                qos: value,
            });
        }
    }
    let solutions = collector.into_entries();
    Ok(SolutionPool {
        status: if solutions.is_empty() {
            Status::Infeasible
        } else {
            Status::Optimal
        },
        solutions,
        nodes_explored: 1u64 << cells,
        time_to_first_feasible: None,
        diagnostic: None,
    })
}
