//! Depth-first branch-and-bound over the `x` variables.
//!
//! Variables are visited time-major; within a step, jobs go by descending
//! priority (ties by index). Because every earlier step of a job is decided
//! when its slot is reached, each constraint family can be checked forward
//! from the job's history. `phi` is derived, never branched on.

use std::time::{Duration, Instant};

use onts_core::{
    check_feasibility, qos, BinaryMatrix, CandidateSolution, Instance, CONTINUOUS_TOL,
};

use crate::partial::PartialAssignment;
use crate::pool::{Collector, PoolEntry, SolutionPool, Status};
use crate::SolveError;

/// Extra slack on floating-point pruning tests. Pruning must never cut a leaf
/// the checker would accept; leaves are verified exactly.
const PRUNE_SLACK: f64 = 1e-7;

/// Hamming ball of radius `delta` around a partial assignment, measured over
/// the center's indices only.
#[derive(Debug, Clone, PartialEq)]
pub struct TrustRegion {
    pub center: PartialAssignment,
    pub delta: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveOptions {
    pub time_limit: Option<Duration>,
    /// Number of best solutions kept (`K`).
    pub pool_size: usize,
    pub fixings: PartialAssignment,
    pub trust: Option<TrustRegion>,
    /// Preferred values; only changes the order in which branches are tried.
    pub warm_hint: Option<PartialAssignment>,
    pub node_limit: Option<u64>,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self {
            time_limit: None,
            pool_size: 1,
            fixings: PartialAssignment::new(),
            trust: None,
            warm_hint: None,
            node_limit: None,
        }
    }
}

impl SolveOptions {
    pub fn with_pool(pool_size: usize) -> Self {
        Self {
            pool_size,
            ..Self::default()
        }
    }
}

#[derive(Debug, Clone, Copy, Default)]
struct JobState {
    prev: u8,
    run_start: usize,
    run_len: usize,
    last_start: Option<usize>,
    starts: usize,
    ones: usize,
}

struct Search<'a> {
    inst: &'a Instance,
    n_jobs: usize,
    horizon: usize,
    order: Vec<usize>,
    rank: Vec<usize>,
    fix_x: Vec<Option<u8>>,
    fix_phi: Vec<Option<u8>>,
    center_x: Vec<Option<u8>>,
    center_phi: Vec<Option<u8>>,
    delta: Option<usize>,
    hint_x: Vec<Option<u8>>,
    hint_phi: Vec<Option<u8>>,
    /// `suffix_avail[j][s]`: slots `s..T` (0-based) where `x_j` may be 1.
    suffix_avail: Vec<Vec<usize>>,
    /// Most ones a job can have: `y_max * t_max`.
    cap: Vec<usize>,
    /// Largest extra load from jobs decided later within the same step.
    rest_max: Vec<f64>,
    soc_per_watt: f64,
    power_limit: Vec<f64>,

    x: Vec<u8>,
    jobs: Vec<JobState>,
    load: f64,
    soc: f64,
    dist: usize,

    collector: Collector,
    nodes: u64,
    started: Instant,
    deadline: Option<Instant>,
    node_limit: Option<u64>,
    stopped: bool,
    first_feasible: Option<f64>,
}

impl<'a> Search<'a> {
    fn cell(&self, j: usize, s: usize) -> usize {
        j * self.horizon + s
    }

    fn statically_zero(&self, j: usize, s: usize) -> bool {
        !self.inst.job(j).in_window(s) || self.fix_x[self.cell(j, s)] == Some(0)
    }

    fn value_order(&self, j: usize, s: usize) -> [u8; 2] {
        let prev = self.jobs[j].prev;
        let preferred = match (self.hint_x[self.cell(j, s)], self.hint_phi[self.cell(j, s)]) {
            (Some(v), _) => v,
            (None, Some(1)) => 1,
            (None, Some(_)) if prev == 0 => 0,
            _ => 1,
        };
        [preferred, 1 - preferred]
    }

    /// Whether `x_{j,s} = v` is consistent with every family given the
    /// decided prefix.
    fn step_ok(&self, p: usize, j: usize, s: usize, v: u8) -> bool {
        let job = self.inst.job(j);
        let big_t = self.horizon;
        let t = s + 1;
        let st = self.jobs[j];
        let cell = self.cell(j, s);

        if self.fix_x[cell].is_some_and(|f| f != v) {
            return false;
        }
        if v == 1 && !job.in_window(s) {
            return false;
        }
        let phi = u8::from(v == 1 && st.prev == 0);
        if self.fix_phi[cell].is_some_and(|f| f != phi) {
            return false;
        }
        if v == 1 && s + 1 < big_t && self.fix_phi[cell + 1] == Some(1) {
            return false;
        }

        if st.prev == 1 {
            let in_tail = st.run_start + job.t_min > big_t + 1;
            if v == 0 && (st.run_len < job.t_min || in_tail) {
                return false;
            }
            if v == 1 && st.run_len >= job.t_max {
                return false;
            }
        }
        let starts = st.starts + phi as usize;
        let last_start = if phi == 1 { Some(t) } else { st.last_start };
        if phi == 1 {
            if starts > job.y_max {
                return false;
            }
            if st.last_start.is_some_and(|ls| t - ls < job.p_min) {
                return false;
            }
        }
        // Window of length p_max ending at t must hold a start.
        if t >= job.p_max {
            let a = t + 1 - job.p_max;
            if last_start.is_none_or(|ls| ls < a) {
                return false;
            }
        }
        // Starts still possible after t cannot reach y_min.
        let room = job.w_max.min(big_t).saturating_sub(t);
        if starts + room.div_ceil(job.p_min) < job.y_min {
            return false;
        }

        if let Some(delta) = self.delta {
            let mut d = self.dist;
            d += usize::from(self.center_x[cell].is_some_and(|c| c != v));
            d += usize::from(self.center_phi[cell].is_some_and(|c| c != phi));
            if d > delta {
                return false;
            }
        }

        let load = self.load + f64::from(v) * job.q;
        if load > self.power_limit[s] + CONTINUOUS_TOL + PRUNE_SLACK {
            return false;
        }
        let r = self.inst.power()[s];
        let bat = self.inst.battery();
        if self.soc + self.soc_per_watt * (r - load) < bat.rho - CONTINUOUS_TOL - PRUNE_SLACK {
            return false;
        }
        let most = load + self.rest_max[p];
        if self.soc + self.soc_per_watt * (r - most) > 1.0 + CONTINUOUS_TOL + PRUNE_SLACK {
            return false;
        }
        true
    }

    fn apply(&mut self, p: usize, j: usize, s: usize, v: u8) {
        let cell = self.cell(j, s);
        let st = &mut self.jobs[j];
        let phi = u8::from(v == 1 && st.prev == 0);
        if phi == 1 {
            st.starts += 1;
            st.last_start = Some(s + 1);
            st.run_start = s + 1;
            st.run_len = 1;
        } else if v == 1 {
            st.run_len += 1;
        } else {
            st.run_len = 0;
        }
        st.ones += v as usize;
        st.prev = v;
        self.x[cell] = v;
        if self.delta.is_some() {
            self.dist += usize::from(self.center_x[cell].is_some_and(|c| c != v));
            self.dist += usize::from(self.center_phi[cell].is_some_and(|c| c != phi));
        }
        self.load += f64::from(v) * self.inst.job(j).q;
        if p % self.n_jobs == self.n_jobs - 1 {
            let r = self.inst.power()[s];
            self.soc += self.soc_per_watt * (r - self.load);
            self.load = 0.0;
        }
    }

    /// QoS upper bound after position `p` has been decided.
    fn bound(&self, p: usize) -> f64 {
        let s = p / self.n_jobs;
        let slot = p % self.n_jobs;
        self.inst
            .jobs()
            .iter()
            .enumerate()
            .map(|(j, job)| {
                let next = if self.rank[j] <= slot { s + 1 } else { s };
                let count = (self.jobs[j].ones + self.suffix_avail[j][next]).min(self.cap[j]);
                job.u * count as f64
            })
            .sum()
    }

    fn tick(&mut self) {
        self.nodes += 1;
        if self.node_limit.is_some_and(|n| self.nodes >= n) {
            self.stopped = true;
        }
        if self.nodes.is_multiple_of(256) && self.deadline.is_some_and(|d| Instant::now() >= d) {
            self.stopped = true;
        }
    }

    fn leaf(&mut self) {
        let x = BinaryMatrix::from_vec(self.n_jobs, self.horizon, self.x.clone())
            .expect("search keeps x binary");
        let solution = CandidateSolution::from_x(x);
        let feasible = check_feasibility(self.inst, &solution)
            .map(|r| r.feasible())
            .unwrap_or(false);
        if !feasible {
            return;
        }
        if self.first_feasible.is_none() {
            self.first_feasible = Some(self.started.elapsed().as_secs_f64());
        }
        let value = qos(self.inst, &solution.x);
        self.collector.offer(PoolEntry {
            solution,
            qos: value,
        });
    }

    fn dfs(&mut self, p: usize) {
        if self.stopped {
            return;
        }
        if p == self.n_jobs * self.horizon {
            self.leaf();
            return;
        }
        let s = p / self.n_jobs;
        let j = self.order[p % self.n_jobs];
        let candidates = self.value_order(j, s);
        let allowed: Vec<u8> = candidates
            .into_iter()
            .filter(|&v| self.step_ok(p, j, s, v))
            .collect();
        let branching = allowed.len() > 1;
        for v in allowed {
            if branching {
                self.tick();
                if self.stopped {
                    return;
                }
            }
            let saved = (self.jobs[j], self.load, self.soc, self.dist);
            self.apply(p, j, s, v);
            let prune = self
                .collector
                .threshold()
                .is_some_and(|worst| self.bound(p) <= worst);
            if !prune {
                self.dfs(p + 1);
            }
            (self.jobs[j], self.load, self.soc, self.dist) = saved;
            let cell = self.cell(j, s);
            self.x[cell] = 0;
            if self.stopped {
                return;
            }
        }
    }
}

fn check_indices(name: &str, part: &PartialAssignment, len: usize) -> Result<(), SolveError> {
    match part.max_index() {
        Some(k) if k >= len => Err(SolveError::IndexOutOfRange {
            what: name.to_string(),
            index: k,
            len,
        }),
        _ => Ok(()),
    }
}

/// First pair of fixings on `x` and `phi` that no schedule can satisfy.
fn fixing_conflict(n_jobs: usize, horizon: usize, fixings: &PartialAssignment) -> Option<String> {
    let base = n_jobs * horizon;
    let x = |j: usize, s: usize| fixings.get(j * horizon + s);
    for (k, v) in fixings.iter().filter(|&(k, _)| k >= base) {
        let (j, s) = ((k - base) / horizon, (k - base) % horizon);
        let prev = if s == 0 { Some(0) } else { x(j, s - 1) };
        let conflict = match v {
            1 => x(j, s) == Some(0) || prev == Some(1),
            _ => x(j, s) == Some(1) && prev == Some(0),
        };
        if conflict {
            return Some(format!(
                "contradictory fixings: phi_{}_{} = {v} disagrees with the fixed x values",
                j + 1,
                s + 1
            ));
        }
    }
    None
}

/// Exact branch-and-bound. With status `Optimal` the pool holds the `K` best
/// schedules satisfying the fixings and trust region.
pub fn solve_bb(inst: &Instance, opts: &SolveOptions) -> Result<SolutionPool, SolveError> {
    let (n_jobs, horizon) = (inst.n_jobs(), inst.horizon());
    let nb = inst.n_binary();
    check_indices("fixing", &opts.fixings, nb)?;
    if let Some(tr) = &opts.trust {
        check_indices("trust center", &tr.center, nb)?;
    }
    if let Some(h) = &opts.warm_hint {
        check_indices("warm hint", h, nb)?;
    }
    let started = Instant::now();
    if let Some(msg) = fixing_conflict(n_jobs, horizon, &opts.fixings) {
        let mut pool = SolutionPool::empty(Status::Infeasible);
        pool.diagnostic = Some(msg);
        return Ok(pool);
    }

    let split = |part: Option<&PartialAssignment>| -> (Vec<Option<u8>>, Vec<Option<u8>>) {
        match part {
            Some(p) => {
                let dense = p.dense(nb);
                (dense[..nb / 2].to_vec(), dense[nb / 2..].to_vec())
            }
            None => (vec![None; nb / 2], vec![None; nb / 2]),
        }
    };
    let (fix_x, fix_phi) = split(Some(&opts.fixings));
    let (center_x, center_phi) = split(opts.trust.as_ref().map(|t| &t.center));
    let (hint_x, hint_phi) = split(opts.warm_hint.as_ref());

    let mut order: Vec<usize> = (0..n_jobs).collect();
    order.sort_by(|&a, &b| inst.job(b).u.total_cmp(&inst.job(a).u).then(a.cmp(&b)));
    let mut rank = vec![0; n_jobs];
    for (pos, &j) in order.iter().enumerate() {
        rank[j] = pos;
    }
    let bat = inst.battery();

    let mut search = Search {
        inst,
        n_jobs,
        horizon,
        order,
        rank,
        fix_x,
        fix_phi,
        center_x,
        center_phi,
        delta: opts.trust.as_ref().map(|t| t.delta),
        hint_x,
        hint_phi,
        suffix_avail: Vec::new(),
        cap: inst.jobs().iter().map(|j| j.y_max * j.t_max).collect(),
        rest_max: Vec::new(),
        soc_per_watt: bat.soc_per_watt(),
        power_limit: inst
            .power()
            .iter()
            .map(|r| r + bat.max_battery_power())
            .collect(),
        x: vec![0; n_jobs * horizon],
        jobs: vec![JobState::default(); n_jobs],
        load: 0.0,
        soc: bat.soc_initial,
        dist: 0,
        collector: Collector::new(opts.pool_size),
        nodes: 1,
        started,
        deadline: opts.time_limit.map(|d| started + d),
        node_limit: opts.node_limit,
        stopped: false,
        first_feasible: None,
    };
    search.suffix_avail = (0..n_jobs)
        .map(|j| {
            let mut suf = vec![0; horizon + 1];
            for s in (0..horizon).rev() {
                suf[s] = suf[s + 1] + usize::from(!search.statically_zero(j, s));
            }
            suf
        })
        .collect();
    search.rest_max = (0..n_jobs * horizon)
        .map(|p| {
            let s = p / n_jobs;
            search.order[p % n_jobs + 1..]
                .iter()
                .filter(|&&j| !search.statically_zero(j, s))
                .map(|&j| inst.job(j).q)
                .sum()
        })
        .collect();

    let initial_soc_ok =
        bat.soc_initial <= 1.0 + CONTINUOUS_TOL && bat.soc_initial >= bat.rho - CONTINUOUS_TOL;
    if initial_soc_ok {
        search.dfs(0);
    }

    let stopped = search.stopped;
    let entries = search.collector.into_entries();
    let status = match (stopped, entries.is_empty()) {
        (false, false) => Status::Optimal,
        (false, true) => Status::Infeasible,
        (true, false) => Status::Feasible,
        (true, true) => Status::Limit,
    };
    Ok(SolutionPool {
        solutions: entries,
        status,
        nodes_explored: search.nodes,
        time_to_first_feasible: search.first_feasible,
        diagnostic: None,
    })
}
