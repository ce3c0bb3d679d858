//! Seeded pseudo-random instance generation.
//!
//! Job parameters follow the FloripaSat-I reference ranges. Panel power comes
//! from a synthetic orbit model: a hard-zero eclipse arc and a half-sine
//! sunlit arc.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::model::{BatteryParams, Instance, JobParams, ModelError};

#[derive(Debug, Error)]
pub enum GenError {
    #[error("sunlit orbit fraction must lie in (0, 1], got {0}")]
    InvalidFraction(f64),
    #[error("peak power must be finite and non-negative, got {0}")]
    InvalidPeak(f64),
    #[error("horizon and job count must be positive")]
    EmptyInstance,
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// Knobs of [`random_instance_with`].
#[derive(Debug, Clone, PartialEq)]
pub struct GeneratorConfig {
    pub orbit_fraction_sunlit: f64,
    /// Target mean panel power as a fraction of the all-jobs-on load `sum_j q_j`.
    pub power_ratio: f64,
    /// Initial battery reserve above `rho`, in watt-steps. `None` starts fully
    /// charged, which makes any net panel surplus overflow the upper SoC bound.
    pub reserve_watt_steps: Option<f64>,
}

impl Default for GeneratorConfig {
    fn default() -> Self {
        Self {
            orbit_fraction_sunlit: 0.6,
            power_ratio: 0.5,
            reserve_watt_steps: Some(5.0),
        }
    }
}

/// Battery used by every generated instance (FloripaSat-I values).
pub fn reference_battery() -> BatteryParams {
    BatteryParams {
        e: 0.9,
        capacity: 5.0,
        gamma: 5.0,
        v_b: 3.6,
        rho: 0.0,
        soc_initial: 1.0,
    }
}

fn ceil_div(a: usize, b: usize) -> usize {
    a.div_ceil(b)
}

/// Panel power over `horizon` steps.
///
/// The eclipse is a contiguous (cyclic) block of `floor((1 - fraction) T)`
/// zero steps starting at a seeded offset. The remaining `S` steps follow
/// `peak * sin(pi (s + 1/2) / S)`, which is strictly positive on the arc.
pub fn power_curve(
    horizon: usize,
    orbit_fraction_sunlit: f64,
    peak_power: f64,
    seed: u64,
) -> Result<Vec<f64>, GenError> {
    if horizon == 0 {
        return Err(GenError::EmptyInstance);
    }
    if !(orbit_fraction_sunlit > 0.0 && orbit_fraction_sunlit <= 1.0) {
        return Err(GenError::InvalidFraction(orbit_fraction_sunlit));
    }
    if !(peak_power.is_finite() && peak_power >= 0.0) {
        return Err(GenError::InvalidPeak(peak_power));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let eclipse = (((1.0 - orbit_fraction_sunlit) * horizon as f64) + 1e-9).floor() as usize;
    let eclipse = eclipse.min(horizon - 1);
    let start = rng.gen_range(0..horizon);
    let sunlit = horizon - eclipse;

    let mut r = vec![0.0; horizon];
    for s in 0..sunlit {
        let idx = (start + eclipse + s) % horizon;
        let phase = PI * (s as f64 + 0.5) / sunlit as f64;
        r[idx] = peak_power * phase.sin().max(0.0);
    }
    Ok(r)
}

/// Draws one job with the reference parameter ranges. Ordered pairs are
/// sampled conditionally so every invariant holds for any seed.
fn sample_job(rng: &mut ChaCha8Rng, n_jobs: usize, horizon: usize) -> JobParams {
    let t = horizon;
    let u = rng.gen_range(1.0..=n_jobs as f64);
    let q = rng.gen_range(0.3..=2.5);
    let y_min = rng.gen_range(1..=ceil_div(t, 45));
    let y_max = rng.gen_range(y_min..=ceil_div(t, 15));
    let t_min = rng.gen_range(1..=ceil_div(t, 10));
    let t_max = rng.gen_range(t_min..=ceil_div(t, 4));
    let p_min = rng.gen_range(t_min..=ceil_div(t, 4));
    let p_max = rng.gen_range(p_min..=t);
    // w_min < w_max <= T must hold even for T = 1.
    let w_min = rng.gen_range(0..=ceil_div(t, 5).min(t - 1));
    let w_max_low = (t - ceil_div(t, 5)).max(w_min + 1);
    let w_max = rng.gen_range(w_max_low..=t);
    JobParams {
        u,
        q,
        y_min,
        y_max,
        t_min,
        t_max,
        p_min,
        p_max,
        w_min,
        w_max,
    }
}

/// Random instance with the default generator settings.
pub fn random_instance(n_jobs: usize, horizon: usize, seed: u64) -> Result<Instance, GenError> {
    random_instance_with(n_jobs, horizon, seed, &GeneratorConfig::default())
}

pub fn random_instance_with(
    n_jobs: usize,
    horizon: usize,
    seed: u64,
    config: &GeneratorConfig,
) -> Result<Instance, GenError> {
    if n_jobs == 0 || horizon == 0 {
        return Err(GenError::EmptyInstance);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let jobs: Vec<JobParams> = (0..n_jobs)
        .map(|_| sample_job(&mut rng, n_jobs, horizon))
        .collect();

    let total_draw: f64 = jobs.iter().map(|j| j.q).sum();
    let target_mean = config.power_ratio * total_draw;
    let curve_seed = rng.gen::<u64>();
    let unit = power_curve(horizon, config.orbit_fraction_sunlit, 1.0, curve_seed)?;
    let unit_mean = unit.iter().sum::<f64>() / horizon as f64;
    let peak = if unit_mean > 0.0 {
        target_mean / unit_mean
    } else {
        0.0
    };
    let r = power_curve(horizon, config.orbit_fraction_sunlit, peak, curve_seed)?;

    let mut battery = reference_battery();
    if let Some(reserve) = config.reserve_watt_steps {
        battery.soc_initial = (battery.rho + reserve * battery.soc_per_watt()).min(1.0);
    }
    Ok(Instance::new(jobs, r, battery)?)
}
