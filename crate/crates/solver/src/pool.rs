//! Solution pools and their CSV form.

use std::fmt;
use std::fmt::Write as _;

use onts_core::io::{bits_from_str, bits_to_string, read_csv};
use onts_core::{check_feasibility, qos, CandidateSolution, Instance};

use crate::SolveError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    /// Search completed; the pool holds the best solutions.
    Optimal,
    /// A limit stopped the search after at least one solution was found.
    Feasible,
    /// Search completed without a solution.
    Infeasible,
    /// A limit stopped the search before any solution was found.
    Limit,
}

impl Status {
    pub fn as_str(self) -> &'static str {
        match self {
            Status::Optimal => "optimal",
            Status::Feasible => "feasible",
            Status::Infeasible => "infeasible",
            Status::Limit => "limit",
        }
    }

    pub fn parse(s: &str) -> Option<Status> {
        [
            Status::Optimal,
            Status::Feasible,
            Status::Infeasible,
            Status::Limit,
        ]
        .into_iter()
        .find(|st| st.as_str() == s)
    }
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PoolEntry {
    pub solution: CandidateSolution,
    pub qos: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolutionPool {
    /// Sorted by QoS descending; equal values keep discovery order.
    pub solutions: Vec<PoolEntry>,
    pub status: Status,
    pub nodes_explored: u64,
    /// Seconds from search start to the first feasible leaf.
    pub time_to_first_feasible: Option<f64>,
    pub diagnostic: Option<String>,
}

impl SolutionPool {
    pub fn empty(status: Status) -> Self {
        Self {
            solutions: Vec::new(),
            status,
            nodes_explored: 0,
            time_to_first_feasible: None,
            diagnostic: None,
        }
    }

    pub fn best(&self) -> Option<&PoolEntry> {
        self.solutions.first()
    }

    pub fn best_qos(&self) -> Option<f64> {
        self.best().map(|e| e.qos)
    }

    pub fn is_empty(&self) -> bool {
        self.solutions.is_empty()
    }

    pub fn len(&self) -> usize {
        self.solutions.len()
    }

    /// Flat `z` vectors of the pooled solutions, sorted, for set comparisons.
    pub fn z_set(&self) -> Vec<Vec<u8>> {
        let mut zs: Vec<Vec<u8>> = self.solutions.iter().map(|e| e.solution.z()).collect();
        zs.sort();
        zs
    }

    /// Summary comment line, header `rank,qos,z` and one row per solution
    /// with `z` written as a `0`/`1` string of length `2 J T`.
    pub fn to_csv(&self) -> String {
        let mut out = format!(
            "# status={} solutions={} nodes={} time_to_first_feasible={}\n",
            self.status,
            self.solutions.len(),
            self.nodes_explored,
            self.time_to_first_feasible
                .map_or_else(|| "none".to_string(), |s| format!("{s:.6}")),
        );
        out.push_str("rank,qos,z\n");
        for (rank, e) in self.solutions.iter().enumerate() {
            let bits = bits_to_string(&e.solution.z());
            let _ = writeln!(out, "{},{},{}", rank + 1, e.qos, bits);
        }
        out
    }

    /// Parses [`SolutionPool::to_csv`] output. Each solution is re-verified
    /// against `inst` and its QoS recomputed.
    pub fn from_csv(text: &str, inst: &Instance) -> Result<Self, SolveError> {
        let mut pool = SolutionPool::empty(Status::Optimal);
        for (i, raw) in text.lines().enumerate() {
            let Some(summary) = raw.trim().strip_prefix('#') else {
                continue;
            };
            let err = |msg: String| SolveError::Parse { line: i + 1, msg };
            for field in summary.split_whitespace() {
                let Some((key, value)) = field.split_once('=') else {
                    continue;
                };
                match key {
                    "status" => {
                        pool.status = Status::parse(value)
                            .ok_or_else(|| err(format!("unknown status `{value}`")))?
                    }
                    "nodes" => {
                        pool.nodes_explored = value.parse().map_err(|e| err(format!("{e}")))?
                    }
                    "time_to_first_feasible" if value != "none" => {
                        pool.time_to_first_feasible =
                            Some(value.parse().map_err(|e| err(format!("{e}")))?)
                    }
                    _ => {}
                }
            }
        }
        let (jn, tn) = (inst.n_jobs(), inst.horizon());
        for (line, (_rank, _qos, bits)) in
            read_csv::<(usize, f64, String)>(text, &["rank", "qos", "z"])?
        {
            let err = |msg: String| SolveError::Parse { line, msg };
            let z = bits_from_str(&bits).ok_or_else(|| err("z must be a 0/1 string".into()))?;
            let solution = CandidateSolution::from_z(jn, tn, &z).map_err(|e| err(e.to_string()))?;
            let report = check_feasibility(inst, &solution).map_err(|e| err(e.to_string()))?;
            if !report.feasible() {
                return Err(err(format!(
                    "stored solution is infeasible: {}",
                    report.violations[0]
                )));
            }
            let value = qos(inst, &solution.x);
            pool.solutions.push(PoolEntry {
                solution,
                qos: value,
            });
        }
        Ok(pool)
    }
}

/// Bounded pool kept sorted by QoS descending. A new solution enters only if
/// it is strictly better than the current worst of a full pool.
#[derive(Debug)]
pub(crate) struct Collector {
    capacity: usize,
    entries: Vec<PoolEntry>,
}

impl Collector {
    pub fn new(capacity: usize) -> Self {
        Self {
            capacity: capacity.max(1),
            entries: Vec::new(),
        }
    }

    pub fn is_full(&self) -> bool {
        self.entries.len() >= self.capacity
    }

    /// Value a candidate subtree must strictly exceed to matter.
    pub fn threshold(&self) -> Option<f64> {
        if self.is_full() {
            self.entries.last().map(|e| e.qos)
        } else {
            None
        }
    }

    pub fn offer(&mut self, entry: PoolEntry) -> bool {
        if let Some(worst) = self.threshold() {
            if entry.qos <= worst {
                return false;
            }
            self.entries.pop();
        }
        let pos = self.entries.partition_point(|e| e.qos >= entry.qos);
        self.entries.insert(pos, entry);
        true
    }

    pub fn into_entries(self) -> Vec<PoolEntry> {
        self.entries
    }
}
