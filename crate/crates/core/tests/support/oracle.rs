//! Independent re-evaluation of the ONTS constraints, written directly from
//! the constraint list with 1-based padded arrays. Shared by test targets; it
//! must not call into `onts_core::model` evaluation code.

#![allow(dead_code)]

use onts_core::Instance;

/// `x[j][t]`, `phi[j][t]` with `t = 1..=T` (index 0 unused).
pub struct Padded {
    pub x: Vec<Vec<i64>>,
    pub phi: Vec<Vec<i64>>,
}

impl Padded {
    pub fn from_flat(n_jobs: usize, horizon: usize, z: &[u8]) -> Self {
        let block = |offset: usize| -> Vec<Vec<i64>> {
            (0..n_jobs)
                .map(|j| {
                    std::iter::once(0)
                        .chain((0..horizon).map(|s| z[offset + j * horizon + s] as i64))
                        .collect()
                })
                .collect()
        };
        Self {
            x: block(0),
            phi: block(n_jobs * horizon),
        }
    }
}

/// Returns the set of violated family tags (sorted, deduplicated).
pub fn violated_tags(inst: &Instance, z: &Padded) -> Vec<&'static str> {
    let big_t = inst.horizon() as i64;
    let mut tags: Vec<&'static str> = Vec::new();
    let sum = |v: &Vec<i64>, a: i64, b: i64| -> i64 {
        let mut s = 0;
        let mut l = a;
        while l <= b {
            s += v[l as usize];
            l += 1;
        }
        s
    };
    for (j, job) in inst.jobs().iter().enumerate() {
        let x = &z.x[j];
        let phi = &z.phi[j];
        if !(phi[1] >= x[1]) {
            tags.push("2a");
        }
        for t in 2..=big_t as usize {
            if !(phi[t] >= x[t] - x[t - 1]) {
                tags.push("2b");
            }
            if !(phi[t] <= 2 - x[t] - x[t - 1]) {
                tags.push("2d");
            }
        }
        for t in 1..=big_t as usize {
            if !(phi[t] <= x[t]) {
                tags.push("2c");
            }
        }
        if sum(x, 1, job.w_min as i64) != 0 {
            tags.push("2e");
        }
        if sum(x, job.w_max as i64 + 1, big_t) != 0 {
            tags.push("2f");
        }
        let (tmin, tmax) = (job.t_min as i64, job.t_max as i64);
        let mut t = 1;
        while t <= big_t - tmin + 1 {
            if !(sum(x, t, t + tmin - 1) >= tmin * phi[t as usize]) {
                tags.push("2g");
            }
            t += 1;
        }
        let mut t = 1;
        while t <= big_t - tmax {
            if !(sum(x, t, t + tmax) <= tmax) {
                tags.push("2h");
            }
            t += 1;
        }
        let mut t = big_t - tmin + 2;
        while t <= big_t {
            if t >= 1 && !(sum(x, t, big_t) >= (big_t - t + 1) * phi[t as usize]) {
                tags.push("2i");
            }
            t += 1;
        }
        let (pmin, pmax) = (job.p_min as i64, job.p_max as i64);
        let mut t = 1;
        while t <= big_t - pmin + 1 {
            if !(sum(phi, t, t + pmin - 1) <= 1) {
                tags.push("2j");
            }
            t += 1;
        }
        let mut t = 1;
        while t <= big_t - pmax + 1 {
            if !(sum(phi, t, t + pmax - 1) >= 1) {
                tags.push("2k");
            }
            t += 1;
        }
        let starts = sum(phi, 1, big_t);
        if !(starts >= job.y_min as i64) {
            tags.push("2l");
        }
        if !(starts <= job.y_max as i64) {
            tags.push("2m");
        }
    }

    let bat = inst.battery();
    let mut soc = bat.soc_initial;
    let tol = 1e-9;
    let check_soc = |soc: f64, tags: &mut Vec<&'static str>| {
        if soc > 1.0 + tol {
            tags.push("3e");
        }
        if soc < bat.rho - tol {
            tags.push("3f");
        }
    };
    check_soc(soc, &mut tags);
    for t in 1..=big_t as usize {
        let mut used = 0.0;
        for (j, job) in inst.jobs().iter().enumerate() {
            if z.x[j][t] == 1 {
                used += job.q;
            }
        }
        let r = inst.power()[t - 1];
        if used > r + bat.gamma * bat.v_b + tol {
            tags.push("3a");
        }
        let b = r - used;
        let i = b / bat.v_b;
        soc += i * bat.e / (60.0 * bat.capacity);
        check_soc(soc, &mut tags);
    }
    tags.sort();
    tags.dedup();
    tags
}

pub fn feasible(inst: &Instance, z: &Padded) -> bool {
    violated_tags(inst, z).is_empty()
}

/// Start indicators of `x` by definition: a start is an off-to-on transition.
pub fn starts_of(x_row: &[u8]) -> Vec<u8> {
    let mut out = Vec::with_capacity(x_row.len());
    for (s, &v) in x_row.iter().enumerate() {
        let before = if s == 0 { 0 } else { x_row[s - 1] };
        out.push(u8::from(v == 1 && before == 0));
    }
    out
}

/// Flat `z` for a flat job-major `x` with derived starts.
pub fn z_from_x(n_jobs: usize, horizon: usize, x: &[u8]) -> Vec<u8> {
    let mut z = x.to_vec();
    for j in 0..n_jobs {
        z.extend(starts_of(&x[j * horizon..(j + 1) * horizon]));
    }
    z
}

/// Bits of `mask` as a 0/1 vector of length `n`.
pub fn bits(mask: u64, n: usize) -> Vec<u8> {
    (0..n).map(|k| ((mask >> k) & 1) as u8).collect()
}

/// Desk-scale test instances: `J in {1, 2}`, `T in 3..=6`, cycling the initial
/// battery reserve through empty, low, default and fully charged.
pub fn small_instances(count: usize, base_seed: u64) -> Vec<Instance> {
    use onts_core::instance_gen::random_instance_with;
    use onts_core::GeneratorConfig;
    (0..count)
        .map(|k| {
            let n_jobs = 1 + k % 2;
            let horizon = 3 + (k / 2) % 4;
            let config = GeneratorConfig {
                reserve_watt_steps: [Some(5.0), Some(0.0), Some(1.0), None][(k / 8) % 4],
                ..GeneratorConfig::default()
            };
            random_instance_with(n_jobs, horizon, base_seed + k as u64, &config).unwrap()
        })
        .collect()
}
