//! Explicit sparse matrix model of an instance.
//!
//! Variables are ordered `x` (job-major, step-minor), then `phi` in the same
//! layout, then `SoC_1 ..= SoC_{T+1}`. The net power and battery current are
//! affine in `x` and are substituted out of the state-of-charge recursion.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::model::{Family, Instance};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Sense {
    Le,
    Eq,
    Ge,
}

impl Sense {
    pub fn symbol(self) -> &'static str {
        match self {
            Sense::Le => "<=",
            Sense::Eq => "=",
            Sense::Ge => ">=",
        }
    }

    /// Whether `lhs (sense) rhs` holds within `tol`.
    pub fn holds(self, lhs: f64, rhs: f64, tol: f64) -> bool {
        match self {
            Sense::Le => lhs <= rhs + tol,
            Sense::Eq => (lhs - rhs).abs() <= tol,
            Sense::Ge => lhs >= rhs - tol,
        }
    }
}

impl fmt::Display for Sense {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.symbol())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum VarKind {
    Binary,
    Continuous { lb: f64, ub: f64 },
}

impl VarKind {
    pub fn is_binary(self) -> bool {
        matches!(self, VarKind::Binary)
    }
}

/// One constraint row `sum coeffs (sense) rhs`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Row {
    pub coeffs: Vec<(usize, f64)>,
    pub sense: Sense,
    pub rhs: f64,
    pub family: Family,
}

impl Row {
    pub fn activity(&self, values: &[f64]) -> f64 {
        self.coeffs.iter().map(|&(c, a)| a * values[c]).sum()
    }
}

/// `max c^T v  s.t.  rows, variable kinds`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StandardForm {
    pub var_names: Vec<String>,
    pub var_kinds: Vec<VarKind>,
    pub objective: Vec<f64>,
    pub rows: Vec<Row>,
}

impl StandardForm {
    pub fn n_vars(&self) -> usize {
        self.var_names.len()
    }

    pub fn n_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn n_binary(&self) -> usize {
        self.var_kinds.iter().filter(|k| k.is_binary()).count()
    }

    pub fn nnz(&self) -> usize {
        self.rows.iter().map(|r| r.coeffs.len()).sum()
    }

    pub fn objective_value(&self, values: &[f64]) -> f64 {
        self.objective.iter().zip(values).map(|(c, v)| c * v).sum()
    }

    /// Indices of rows violated by `values`. Variable bounds are checked by
    /// [`StandardForm::bound_violations`].
    pub fn violated_rows(&self, values: &[f64], tol: f64) -> Vec<usize> {
        self.rows
            .iter()
            .enumerate()
            .filter(|(_, row)| !row.sense.holds(row.activity(values), row.rhs, tol))
            .map(|(i, _)| i)
            .collect()
    }

    pub fn bound_violations(&self, values: &[f64], tol: f64) -> Vec<usize> {
        self.var_kinds
            .iter()
            .zip(values)
            .enumerate()
            .filter(|(_, (kind, &v))| match kind {
                VarKind::Binary => v != 0.0 && v != 1.0,
                VarKind::Continuous { lb, ub } => v < lb - tol || v > ub + tol,
            })
            .map(|(i, _)| i)
            .collect()
    }

    pub fn is_feasible(&self, values: &[f64], tol: f64) -> bool {
        values.len() == self.n_vars()
            && self.bound_violations(values, tol).is_empty()
            && self.violated_rows(values, tol).is_empty()
    }

    /// Number of rows per family, in family order.
    pub fn family_counts(&self) -> Vec<(Family, usize)> {
        Family::ALL
            .iter()
            .map(|&f| (f, self.rows.iter().filter(|r| r.family == f).count()))
            .filter(|&(_, n)| n > 0)
            .collect()
    }
}

/// Column layout of the standard form of an instance.
#[derive(Debug, Clone, Copy)]
pub struct Columns {
    pub n_jobs: usize,
    pub horizon: usize,
}

impl Columns {
    pub fn of(inst: &Instance) -> Self {
        Self {
            n_jobs: inst.n_jobs(),
            horizon: inst.horizon(),
        }
    }

    /// `x_{j,t}` for job `j` (0-based) and model time `t` (1-based).
    pub fn x(&self, j: usize, t: usize) -> usize {
        j * self.horizon + t - 1
    }

    pub fn phi(&self, j: usize, t: usize) -> usize {
        self.n_jobs * self.horizon + j * self.horizon + t - 1
    }

    /// `SoC_t`, `t = 1 ..= T + 1`.
    pub fn soc(&self, t: usize) -> usize {
        2 * self.n_jobs * self.horizon + t - 1
    }

    pub fn n_vars(&self) -> usize {
        2 * self.n_jobs * self.horizon + self.horizon + 1
    }
}

struct RowSink {
    rows: Vec<Row>,
}

impl RowSink {
    fn push(&mut self, family: Family, coeffs: Vec<(usize, f64)>, sense: Sense, rhs: f64) {
        // Empty sums are vacuous (0 = 0) and produce no row.
        if !coeffs.is_empty() {
            self.rows.push(Row {
                coeffs,
                sense,
                rhs,
                family,
            });
        }
    }
}

/// Lowers an instance to its standard form. Row order is by family, then job,
/// then time.
pub fn build_standard_form(inst: &Instance) -> StandardForm {
    let cols = Columns::of(inst);
    let (n_jobs, horizon) = (inst.n_jobs(), inst.horizon());

    let mut var_names = Vec::with_capacity(cols.n_vars());
    let mut var_kinds = Vec::with_capacity(cols.n_vars());
    let mut objective = Vec::with_capacity(cols.n_vars());
    for j in 0..n_jobs {
        for t in 1..=horizon {
            var_names.push(format!("x_{}_{}", j + 1, t));
            var_kinds.push(VarKind::Binary);
            objective.push(inst.job(j).u);
        }
    }
    for j in 0..n_jobs {
        for t in 1..=horizon {
            var_names.push(format!("phi_{}_{}", j + 1, t));
            var_kinds.push(VarKind::Binary);
            objective.push(0.0);
        }
    }
    for t in 1..=horizon + 1 {
        var_names.push(format!("soc_{t}"));
        var_kinds.push(VarKind::Continuous {
            lb: f64::NEG_INFINITY,
            ub: f64::INFINITY,
        });
        objective.push(0.0);
    }

    let mut sink = RowSink { rows: Vec::new() };
    let x = |j, t| cols.x(j, t);
    let phi = |j, t| cols.phi(j, t);
    let x_span = |j: usize, from: usize, to: usize| -> Vec<(usize, f64)> {
        (from..=to).map(|l| (x(j, l), 1.0)).collect()
    };
    let phi_span = |j: usize, from: usize, to: usize| -> Vec<(usize, f64)> {
        (from..=to).map(|l| (phi(j, l), 1.0)).collect()
    };
    let jobs = inst.jobs();

    for j in 0..n_jobs {
        sink.push(
            Family::StartFirst,
            vec![(phi(j, 1), 1.0), (x(j, 1), -1.0)],
            Sense::Ge,
            0.0,
        );
    }
    for j in 0..n_jobs {
        for t in 2..=horizon {
            sink.push(
                Family::StartRise,
                vec![(phi(j, t), 1.0), (x(j, t), -1.0), (x(j, t - 1), 1.0)],
                Sense::Ge,
                0.0,
            );
        }
    }
    for j in 0..n_jobs {
        for t in 1..=horizon {
            sink.push(
                Family::StartRunning,
                vec![(phi(j, t), 1.0), (x(j, t), -1.0)],
                Sense::Le,
                0.0,
            );
        }
    }
    for j in 0..n_jobs {
        for t in 2..=horizon {
            sink.push(
                Family::StartFresh,
                vec![(phi(j, t), 1.0), (x(j, t), 1.0), (x(j, t - 1), 1.0)],
                Sense::Le,
                2.0,
            );
        }
    }
    for (j, job) in jobs.iter().enumerate() {
        sink.push(Family::WindowOpen, x_span(j, 1, job.w_min), Sense::Eq, 0.0);
    }
    for (j, job) in jobs.iter().enumerate() {
        sink.push(
            Family::WindowClose,
            x_span(j, job.w_max + 1, horizon),
            Sense::Eq,
            0.0,
        );
    }
    for (j, job) in jobs.iter().enumerate() {
        for t in 1..=(horizon + 1).saturating_sub(job.t_min) {
            let mut coeffs = x_span(j, t, t + job.t_min - 1);
            coeffs.push((phi(j, t), -(job.t_min as f64)));
            sink.push(Family::MinRun, coeffs, Sense::Ge, 0.0);
        }
    }
    for (j, job) in jobs.iter().enumerate() {
        for t in 1..=horizon.saturating_sub(job.t_max) {
            sink.push(
                Family::MaxRun,
                x_span(j, t, t + job.t_max),
                Sense::Le,
                job.t_max as f64,
            );
        }
    }
    for (j, job) in jobs.iter().enumerate() {
        for t in (horizon + 2).saturating_sub(job.t_min).max(1)..=horizon {
            let mut coeffs = x_span(j, t, horizon);
            coeffs.push((phi(j, t), -((horizon - t + 1) as f64)));
            sink.push(Family::TailRun, coeffs, Sense::Ge, 0.0);
        }
    }
    for (j, job) in jobs.iter().enumerate() {
        for t in 1..=(horizon + 1).saturating_sub(job.p_min) {
            sink.push(
                Family::MinPeriod,
                phi_span(j, t, t + job.p_min - 1),
                Sense::Le,
                1.0,
            );
        }
    }
    for (j, job) in jobs.iter().enumerate() {
        for t in 1..=(horizon + 1).saturating_sub(job.p_max) {
            sink.push(
                Family::MaxPeriod,
                phi_span(j, t, t + job.p_max - 1),
                Sense::Ge,
                1.0,
            );
        }
    }
    for (j, job) in jobs.iter().enumerate() {
        sink.push(
            Family::MinStarts,
            phi_span(j, 1, horizon),
            Sense::Ge,
            job.y_min as f64,
        );
    }
    for (j, job) in jobs.iter().enumerate() {
        sink.push(
            Family::MaxStarts,
            phi_span(j, 1, horizon),
            Sense::Le,
            job.y_max as f64,
        );
    }

    let bat = inst.battery();
    let r = inst.power();
    for t in 1..=horizon {
        let coeffs = (0..n_jobs).map(|j| (x(j, t), jobs[j].q)).collect();
        sink.push(
            Family::PowerLimit,
            coeffs,
            Sense::Le,
            r[t - 1] + bat.max_battery_power(),
        );
    }
    let k = bat.soc_per_watt();
    sink.push(
        Family::SocBalance,
        vec![(cols.soc(1), 1.0)],
        Sense::Eq,
        bat.soc_initial,
    );
    for t in 1..=horizon {
        let mut coeffs = vec![(cols.soc(t + 1), 1.0), (cols.soc(t), -1.0)];
        coeffs.extend((0..n_jobs).map(|j| (x(j, t), k * jobs[j].q)));
        sink.push(Family::SocBalance, coeffs, Sense::Eq, k * r[t - 1]);
    }
    for t in 1..=horizon + 1 {
        sink.push(Family::SocUpper, vec![(cols.soc(t), 1.0)], Sense::Le, 1.0);
    }
    for t in 1..=horizon + 1 {
        sink.push(
            Family::SocLower,
            vec![(cols.soc(t), 1.0)],
            Sense::Ge,
            bat.rho,
        );
    }

    StandardForm {
        var_names,
        var_kinds,
        objective,
        rows: sink.rows,
    }
}

/// Full variable vector `(z, SoC)` for a candidate, with the state of charge
/// obtained from the battery recursion.
pub fn assignment_values(inst: &Instance, z: &crate::model::CandidateSolution) -> Vec<f64> {
    let traj = crate::model::soc_trajectory(inst, &z.x);
    z.z().into_iter().map(f64::from).chain(traj.soc).collect()
}
