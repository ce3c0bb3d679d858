//! Instance parameters, candidate schedules and the exact semantics of the
//! ONTS formulation.
//!
//! Time is 1-based in the model (`t = 1..=T`, state of charge additionally at
//! `T + 1`). The Rust API indexes jobs and steps from zero; a step index `s`
//! is model time `s + 1`. [`Violation::time`] reports model time.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Absolute tolerance for the continuous (power and state-of-charge) rows.
pub const CONTINUOUS_TOL: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModelError {
    #[error("job {job}: {msg}")]
    InvalidJob { job: usize, msg: String },
    #[error("invalid battery parameters: {0}")]
    InvalidBattery(String),
    #[error("power vector has length {got}, expected horizon {expected}")]
    PowerLength { got: usize, expected: usize },
    #[error("power availability r[{0}] is negative or not finite")]
    NegativePower(usize),
    #[error("instance needs at least one job and one time step")]
    Empty,
    #[error("dimension mismatch: expected {expected_jobs}x{expected_horizon}, got {got_jobs}x{got_horizon}")]
    Dimension {
        expected_jobs: usize,
        expected_horizon: usize,
        got_jobs: usize,
        got_horizon: usize,
    },
    #[error("value {0} is not binary")]
    NotBinary(u8),
}

/// Parameters of a single job.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JobParams {
    /// Priority weight in the objective.
    pub u: f64,
    /// Power draw while running (W).
    pub q: f64,
    pub y_min: usize,
    pub y_max: usize,
    pub t_min: usize,
    pub t_max: usize,
    pub p_min: usize,
    pub p_max: usize,
    pub w_min: usize,
    pub w_max: usize,
}

impl JobParams {
    pub fn validate(&self, horizon: usize) -> Result<(), String> {
        if !(self.u.is_finite() && self.u > 0.0) {
            return Err(format!("priority u = {} must be positive", self.u));
        }
        if !(self.q.is_finite() && self.q > 0.0) {
            return Err(format!("power draw q = {} must be positive", self.q));
        }
        if self.y_min > self.y_max {
            return Err(format!("y_min {} > y_max {}", self.y_min, self.y_max));
        }
        // t_min = 0 would index a start indicator past the horizon in the
        // minimum run-length rows.
        if self.t_min == 0 {
            return Err("t_min must be at least 1".into());
        }
        if self.t_min > self.t_max {
            return Err(format!("t_min {} > t_max {}", self.t_min, self.t_max));
        }
        if !(self.t_min <= self.p_min && self.p_min <= self.p_max && self.p_max <= horizon) {
            return Err(format!(
                "need t_min <= p_min <= p_max <= T, got {} <= {} <= {} <= {}",
                self.t_min, self.p_min, self.p_max, horizon
            ));
        }
        if !(self.w_min < self.w_max && self.w_max <= horizon) {
            return Err(format!(
                "need w_min < w_max <= T, got {} < {} <= {}",
                self.w_min, self.w_max, horizon
            ));
        }
        Ok(())
    }

    /// Whether the job may run at step index `step` (model time `step + 1`).
    pub fn in_window(&self, step: usize) -> bool {
        let t = step + 1;
        t > self.w_min && t <= self.w_max
    }
}

fn default_soc_initial() -> f64 {
    1.0
}

/// Battery and power-bus parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BatteryParams {
    /// Charge/discharge efficiency.
    pub e: f64,
    /// Capacity (Ah).
    #[serde(rename = "Q")]
    pub capacity: f64,
    /// Maximum discharge current factor (A).
    pub gamma: f64,
    /// Bus voltage (V).
    #[serde(rename = "V_b")]
    pub v_b: f64,
    /// Minimum state of charge.
    pub rho: f64,
    #[serde(default = "default_soc_initial")]
    pub soc_initial: f64,
}

impl BatteryParams {
    pub fn validate(&self) -> Result<(), String> {
        let positive = |name: &str, v: f64| {
            if v.is_finite() && v > 0.0 {
                Ok(())
            } else {
                Err(format!("{name} = {v} must be positive"))
            }
        };
        positive("e", self.e)?;
        if self.e > 1.0 {
            return Err(format!("efficiency e = {} exceeds 1", self.e));
        }
        positive("Q", self.capacity)?;
        positive("gamma", self.gamma)?;
        positive("V_b", self.v_b)?;
        if !(self.rho.is_finite() && (0.0..1.0).contains(&self.rho)) {
            return Err(format!("rho = {} must lie in [0, 1)", self.rho));
        }
        if !(self.soc_initial >= self.rho && self.soc_initial <= 1.0) {
            return Err(format!(
                "soc_initial = {} must lie in [rho, 1]",
                self.soc_initial
            ));
        }
        Ok(())
    }

    /// State-of-charge change per watt of net power over one step,
    /// `e / (60 Q V_b)`.
    pub fn soc_per_watt(&self) -> f64 {
        self.e / (60.0 * self.capacity * self.v_b)
    }

    /// Maximum power the battery can supply, `gamma * V_b`.
    pub fn max_battery_power(&self) -> f64 {
        self.gamma * self.v_b
    }
}

#[derive(Serialize, Deserialize)]
struct RawInstance {
    #[serde(rename = "J")]
    n_jobs: usize,
    #[serde(rename = "T")]
    horizon: usize,
    jobs: Vec<JobParams>,
    r: Vec<f64>,
    battery: BatteryParams,
}

/// A complete ONTS instance. Immutable once constructed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawInstance", into = "RawInstance")]
pub struct Instance {
    jobs: Vec<JobParams>,
    r: Vec<f64>,
    battery: BatteryParams,
}

impl TryFrom<RawInstance> for Instance {
    type Error = ModelError;

    fn try_from(raw: RawInstance) -> Result<Self, Self::Error> {
        if raw.jobs.len() != raw.n_jobs {
            return Err(ModelError::Dimension {
                expected_jobs: raw.n_jobs,
                expected_horizon: raw.horizon,
                got_jobs: raw.jobs.len(),
                got_horizon: raw.r.len(),
            });
        }
        if raw.r.len() != raw.horizon {
            return Err(ModelError::PowerLength {
                got: raw.r.len(),
                expected: raw.horizon,
            });
        }
        Instance::new(raw.jobs, raw.r, raw.battery)
    }
}

impl From<Instance> for RawInstance {
    fn from(inst: Instance) -> Self {
        RawInstance {
            n_jobs: inst.jobs.len(),
            horizon: inst.r.len(),
            jobs: inst.jobs,
            r: inst.r,
            battery: inst.battery,
        }
    }
}

impl Instance {
    /// Validates every parameter invariant. The horizon is `r.len()`.
    pub fn new(
        jobs: Vec<JobParams>,
        r: Vec<f64>,
        battery: BatteryParams,
    ) -> Result<Self, ModelError> {
        if jobs.is_empty() || r.is_empty() {
            return Err(ModelError::Empty);
        }
        let horizon = r.len();
        for (job, params) in jobs.iter().enumerate() {
            params
                .validate(horizon)
                .map_err(|msg| ModelError::InvalidJob { job, msg })?;
        }
        if let Some(t) = r.iter().position(|v| !(v.is_finite() && *v >= 0.0)) {
            return Err(ModelError::NegativePower(t));
        }
        battery.validate().map_err(ModelError::InvalidBattery)?;
        Ok(Self { jobs, r, battery })
    }

    pub fn n_jobs(&self) -> usize {
        self.jobs.len()
    }

    pub fn horizon(&self) -> usize {
        self.r.len()
    }

    pub fn jobs(&self) -> &[JobParams] {
        &self.jobs
    }

    pub fn job(&self, j: usize) -> &JobParams {
        &self.jobs[j]
    }

    /// Power available from the panels at each step (W).
    pub fn power(&self) -> &[f64] {
        &self.r
    }

    pub fn battery(&self) -> &BatteryParams {
        &self.battery
    }

    /// Number of binary variables `2 J T`.
    pub fn n_binary(&self) -> usize {
        2 * self.n_jobs() * self.horizon()
    }

    /// Copy of this instance with a different battery.
    pub fn with_battery(&self, battery: BatteryParams) -> Result<Self, ModelError> {
        Self::new(self.jobs.clone(), self.r.clone(), battery)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("instance serialization cannot fail")
    }

    pub fn from_json(text: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }
}

/// Dense `rows x cols` matrix of 0/1 entries, row-major (job-major, step-minor).
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct BinaryMatrix {
    rows: usize,
    cols: usize,
    data: Vec<u8>,
}

impl BinaryMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![0; rows * cols],
        }
    }

    pub fn from_vec(rows: usize, cols: usize, data: Vec<u8>) -> Result<Self, ModelError> {
        if data.len() != rows * cols {
            return Err(ModelError::Dimension {
                expected_jobs: rows,
                expected_horizon: cols,
                got_jobs: data.len() / cols.max(1),
                got_horizon: cols,
            });
        }
        if let Some(&bad) = data.iter().find(|&&v| v > 1) {
            return Err(ModelError::NotBinary(bad));
        }
        Ok(Self { rows, cols, data })
    }

    pub fn from_rows(rows: &[Vec<u8>]) -> Result<Self, ModelError> {
        let cols = rows.first().map_or(0, Vec::len);
        let data: Vec<u8> = rows.iter().flatten().copied().collect();
        if rows.iter().any(|r| r.len() != cols) {
            return Err(ModelError::Dimension {
                expected_jobs: rows.len(),
                expected_horizon: cols,
                got_jobs: rows.len(),
                got_horizon: 0,
            });
        }
        Self::from_vec(rows.len(), cols, data)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> u8 {
        self.data[row * self.cols + col]
    }

    #[inline]
    pub fn set(&mut self, row: usize, col: usize, value: bool) {
        self.data[row * self.cols + col] = value as u8;
    }

    pub fn row(&self, row: usize) -> &[u8] {
        &self.data[row * self.cols..(row + 1) * self.cols]
    }

    pub fn as_slice(&self) -> &[u8] {
        &self.data
    }

    pub fn count_ones(&self) -> usize {
        self.data.iter().map(|&v| v as usize).sum()
    }
}

/// A full binary assignment `z = (x, phi)`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct CandidateSolution {
    pub x: BinaryMatrix,
    pub phi: BinaryMatrix,
}

impl CandidateSolution {
    pub fn zeros(n_jobs: usize, horizon: usize) -> Self {
        Self {
            x: BinaryMatrix::zeros(n_jobs, horizon),
            phi: BinaryMatrix::zeros(n_jobs, horizon),
        }
    }

    /// Schedule `x` with its forced start indicators.
    pub fn from_x(x: BinaryMatrix) -> Self {
        let phi = derive_phi(&x);
        Self { x, phi }
    }

    /// Splits a flat `z` vector (x block then phi block, each job-major).
    pub fn from_z(n_jobs: usize, horizon: usize, z: &[u8]) -> Result<Self, ModelError> {
        let half = n_jobs * horizon;
        if z.len() != 2 * half {
            return Err(ModelError::Dimension {
                expected_jobs: n_jobs,
                expected_horizon: horizon,
                got_jobs: z.len() / (2 * horizon.max(1)),
                got_horizon: horizon,
            });
        }
        Ok(Self {
            x: BinaryMatrix::from_vec(n_jobs, horizon, z[..half].to_vec())?,
            phi: BinaryMatrix::from_vec(n_jobs, horizon, z[half..].to_vec())?,
        })
    }

    pub fn n_jobs(&self) -> usize {
        self.x.rows()
    }

    pub fn horizon(&self) -> usize {
        self.x.cols()
    }

    /// Flat `z` vector of length `2 J T`.
    pub fn z(&self) -> Vec<u8> {
        let mut z = Vec::with_capacity(2 * self.x.as_slice().len());
        z.extend_from_slice(self.x.as_slice());
        z.extend_from_slice(self.phi.as_slice());
        z
    }

    /// Entry `k` of the flat `z` vector.
    pub fn z_at(&self, k: usize) -> u8 {
        let half = self.x.as_slice().len();
        if k < half {
            self.x.as_slice()[k]
        } else {
            self.phi.as_slice()[k - half]
        }
    }

    fn check_dims(&self, inst: &Instance) -> Result<(), ModelError> {
        let ok = |m: &BinaryMatrix| m.rows() == inst.n_jobs() && m.cols() == inst.horizon();
        if ok(&self.x) && ok(&self.phi) {
            Ok(())
        } else {
            Err(ModelError::Dimension {
                expected_jobs: inst.n_jobs(),
                expected_horizon: inst.horizon(),
                got_jobs: self.x.rows(),
                got_horizon: self.x.cols(),
            })
        }
    }
}

/// Constraint families of the formulation, in model row order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Family {
    /// `phi_{j,1} >= x_{j,1}`
    StartFirst,
    /// `phi_{j,t} >= x_{j,t} - x_{j,t-1}`
    StartRise,
    /// `phi_{j,t} <= x_{j,t}`
    StartRunning,
    /// `phi_{j,t} <= 2 - x_{j,t} - x_{j,t-1}`
    StartFresh,
    /// No activity at or before `w_min`.
    WindowOpen,
    /// No activity after `w_max`.
    WindowClose,
    /// A start is followed by at least `t_min` active steps.
    MinRun,
    /// No run longer than `t_max`.
    MaxRun,
    /// A start in the last `t_min - 1` steps runs to the end of the horizon.
    TailRun,
    /// At most one start in any `p_min` window.
    MinPeriod,
    /// At least one start in any `p_max` window.
    MaxPeriod,
    MinStarts,
    MaxStarts,
    /// Instantaneous consumption within panel plus battery power.
    PowerLimit,
    /// State-of-charge balance (only present in the matrix model).
    SocBalance,
    SocUpper,
    SocLower,
}

impl Family {
    pub const ALL: [Family; 17] = [
        Family::StartFirst,
        Family::StartRise,
        Family::StartRunning,
        Family::StartFresh,
        Family::WindowOpen,
        Family::WindowClose,
        Family::MinRun,
        Family::MaxRun,
        Family::TailRun,
        Family::MinPeriod,
        Family::MaxPeriod,
        Family::MinStarts,
        Family::MaxStarts,
        Family::PowerLimit,
        Family::SocBalance,
        Family::SocUpper,
        Family::SocLower,
    ];

    /// Equation tag of the family, e.g. `"2l"`.
    pub fn tag(self) -> &'static str {
        match self {
            Family::StartFirst => "2a",
            Family::StartRise => "2b",
            Family::StartRunning => "2c",
            Family::StartFresh => "2d",
            Family::WindowOpen => "2e",
            Family::WindowClose => "2f",
            Family::MinRun => "2g",
            Family::MaxRun => "2h",
            Family::TailRun => "2i",
            Family::MinPeriod => "2j",
            Family::MaxPeriod => "2k",
            Family::MinStarts => "2l",
            Family::MaxStarts => "2m",
            Family::PowerLimit => "3a",
            Family::SocBalance => "3d",
            Family::SocUpper => "3e",
            Family::SocLower => "3f",
        }
    }

    pub fn from_tag(tag: &str) -> Option<Family> {
        Family::ALL.iter().copied().find(|f| f.tag() == tag)
    }

    pub fn is_continuous(self) -> bool {
        matches!(
            self,
            Family::PowerLimit | Family::SocBalance | Family::SocUpper | Family::SocLower
        )
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({})", self.tag())
    }
}

/// One violated constraint row.
#[derive(Debug, Clone, PartialEq)]
pub struct Violation {
    pub family: Family,
    /// Zero-based job index, for job-specific rows.
    pub job: Option<usize>,
    /// Model time (1-based) anchoring the row, when the row is indexed by time.
    pub time: Option<usize>,
    pub lhs: f64,
    pub bound: f64,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.family)?;
        if let Some(j) = self.job {
            write!(f, " job {}", j + 1)?;
        }
        if let Some(t) = self.time {
            write!(f, " t={t}")?;
        }
        write!(f, ": lhs {} vs bound {}", self.lhs, self.bound)
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct FeasibilityReport {
    pub violations: Vec<Violation>,
}

impl FeasibilityReport {
    pub fn feasible(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn families(&self) -> Vec<Family> {
        let mut out: Vec<Family> = self.violations.iter().map(|v| v.family).collect();
        out.sort();
        out.dedup();
        out
    }
}

/// Start indicators forced by `x`: `phi_{j,1} = x_{j,1}` and
/// `phi_{j,t} = x_{j,t} (1 - x_{j,t-1})` for `t > 1`.
pub fn derive_phi(x: &BinaryMatrix) -> BinaryMatrix {
    let mut phi = BinaryMatrix::zeros(x.rows(), x.cols());
    for j in 0..x.rows() {
        let mut prev = 0;
        for s in 0..x.cols() {
            let cur = x.get(j, s);
            phi.set(j, s, cur == 1 && prev == 0);
            prev = cur;
        }
    }
    phi
}

/// Quality of service `sum_j sum_t u_j x_{j,t}`.
///
/// Evaluated as `sum_j u_j * (ones in row j)` so that two schedules with the
/// same per-job activity counts have bit-identical values.
pub fn qos(inst: &Instance, x: &BinaryMatrix) -> f64 {
    inst.jobs()
        .iter()
        .enumerate()
        .map(|(j, job)| {
            let ones: usize = x.row(j).iter().map(|&v| v as usize).sum();
            job.u * ones as f64
        })
        .sum()
}

/// Battery trajectory of a schedule.
#[derive(Debug, Clone, PartialEq)]
pub struct SocTrajectory {
    /// `SoC_1 ..= SoC_{T+1}`.
    pub soc: Vec<f64>,
    /// Net power `b_t = r_t - sum_j q_j x_{j,t}`.
    pub balance: Vec<f64>,
    /// Battery current `i_t = b_t / V_b`.
    pub current: Vec<f64>,
}

/// Applies the state-of-charge recursion literally, without clamping.
pub fn soc_trajectory(inst: &Instance, x: &BinaryMatrix) -> SocTrajectory {
    let horizon = inst.horizon();
    let bat = inst.battery();
    let mut soc = Vec::with_capacity(horizon + 1);
    let mut balance = Vec::with_capacity(horizon);
    let mut current = Vec::with_capacity(horizon);
    soc.push(bat.soc_initial);
    for s in 0..horizon {
        let load: f64 = (0..inst.n_jobs())
            .map(|j| inst.job(j).q * x.get(j, s) as f64)
            .sum();
        let b = inst.power()[s] - load;
        let i = b / bat.v_b;
        let next = soc[s] + i * bat.e / (60.0 * bat.capacity);
        balance.push(b);
        current.push(i);
        soc.push(next);
    }
    SocTrajectory {
        soc,
        balance,
        current,
    }
}

/// Evaluates every constraint row of the formulation for `z` and reports all
/// violated rows. Binary rows use exact integer arithmetic; power and
/// state-of-charge rows use [`CONTINUOUS_TOL`].
pub fn check_feasibility(
    inst: &Instance,
    z: &CandidateSolution,
) -> Result<FeasibilityReport, ModelError> {
    z.check_dims(inst)?;
    let horizon = inst.horizon();
    let mut violations = Vec::new();

    for (j, job) in inst.jobs().iter().enumerate() {
        // 1-based accessors.
        let x = |t: usize| z.x.get(j, t - 1) as i64;
        let phi = |t: usize| z.phi.get(j, t - 1) as i64;
        let x_sum = |from: usize, to: usize| (from..=to).map(x).sum::<i64>();
        let phi_sum = |from: usize, to: usize| (from..=to).map(phi).sum::<i64>();
        let mut report = |family: Family, time: Option<usize>, lhs: i64, bound: i64| {
            violations.push(Violation {
                family,
                job: Some(j),
                time,
                lhs: lhs as f64,
                bound: bound as f64,
            });
        };

        let big_t = horizon;
        if phi(1) < x(1) {
            report(Family::StartFirst, Some(1), phi(1), x(1));
        }
        for t in 2..=big_t {
            let rise = x(t) - x(t - 1);
            if phi(t) < rise {
                report(Family::StartRise, Some(t), phi(t), rise);
            }
        }
        for t in 1..=big_t {
            if phi(t) > x(t) {
                report(Family::StartRunning, Some(t), phi(t), x(t));
            }
        }
        for t in 2..=big_t {
            let cap = 2 - x(t) - x(t - 1);
            if phi(t) > cap {
                report(Family::StartFresh, Some(t), phi(t), cap);
            }
        }

        let open = x_sum(1, job.w_min.min(big_t));
        if open != 0 {
            report(Family::WindowOpen, None, open, 0);
        }
        let close = x_sum(job.w_max + 1, big_t);
        if close != 0 {
            report(Family::WindowClose, None, close, 0);
        }

        let t_min = job.t_min as i64;
        for t in 1..=(big_t + 1).saturating_sub(job.t_min) {
            let lhs = x_sum(t, t + job.t_min - 1);
            if lhs < t_min * phi(t) {
                report(Family::MinRun, Some(t), lhs, t_min * phi(t));
            }
        }
        for t in 1..=big_t.saturating_sub(job.t_max) {
            let lhs = x_sum(t, t + job.t_max);
            if lhs > job.t_max as i64 {
                report(Family::MaxRun, Some(t), lhs, job.t_max as i64);
            }
        }
        for t in (big_t + 2).saturating_sub(job.t_min).max(1)..=big_t {
            let lhs = x_sum(t, big_t);
            let need = (big_t - t + 1) as i64 * phi(t);
            if lhs < need {
                report(Family::TailRun, Some(t), lhs, need);
            }
        }

        for t in 1..=(big_t + 1).saturating_sub(job.p_min) {
            let lhs = phi_sum(t, t + job.p_min - 1);
            if lhs > 1 {
                report(Family::MinPeriod, Some(t), lhs, 1);
            }
        }
        for t in 1..=(big_t + 1).saturating_sub(job.p_max) {
            let lhs = phi_sum(t, t + job.p_max - 1);
            if lhs < 1 {
                report(Family::MaxPeriod, Some(t), lhs, 1);
            }
        }

        let starts = phi_sum(1, big_t);
        if starts < job.y_min as i64 {
            report(Family::MinStarts, None, starts, job.y_min as i64);
        }
        if starts > job.y_max as i64 {
            report(Family::MaxStarts, None, starts, job.y_max as i64);
        }
    }

    let bat = inst.battery();
    let limit_extra = bat.max_battery_power();
    for s in 0..horizon {
        let load: f64 = (0..inst.n_jobs())
            .map(|j| inst.job(j).q * z.x.get(j, s) as f64)
            .sum();
        let bound = inst.power()[s] + limit_extra;
        if load > bound + CONTINUOUS_TOL {
            violations.push(Violation {
                family: Family::PowerLimit,
                job: None,
                time: Some(s + 1),
                lhs: load,
                bound,
            });
        }
    }

    let traj = soc_trajectory(inst, &z.x);
    for (s, &soc) in traj.soc.iter().enumerate() {
        if soc > 1.0 + CONTINUOUS_TOL {
            violations.push(Violation {
                family: Family::SocUpper,
                job: None,
                time: Some(s + 1),
                lhs: soc,
                bound: 1.0,
            });
        }
        if soc < bat.rho - CONTINUOUS_TOL {
            violations.push(Violation {
                family: Family::SocLower,
                job: None,
                time: Some(s + 1),
                lhs: soc,
                bound: bat.rho,
            });
        }
    }

    Ok(FeasibilityReport { violations })
}
