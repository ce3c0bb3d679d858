//! Supervised dataset generation: random instances, solved with a bounded
//! pool, kept only when the pool is nonempty.

use std::path::{Path, PathBuf};
use std::time::Duration;

use onts_core::instance_gen::random_instance_with;
use onts_core::io::{load_instance, read_text, save_instance, write_text};
use onts_core::{GeneratorConfig, Instance};
use onts_solver::{solve_bb, SolutionPool, SolveOptions};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::PipelineError;

pub const DEFAULT_POOL_SIZE: usize = 50;
pub const DEFAULT_TIME_LIMIT_SECS: f64 = 10.0;
/// Attempts allowed per requested instance.
pub const ATTEMPTS_PER_INSTANCE: usize = 100;

#[derive(Debug, Clone, PartialEq)]
pub struct DatasetConfig {
    pub n_jobs: usize,
    pub horizon: usize,
    pub n: usize,
    pub seed: u64,
    pub pool_size: usize,
    pub time_limit_secs: f64,
    pub generator: GeneratorConfig,
}

impl DatasetConfig {
    pub fn new(n_jobs: usize, horizon: usize, n: usize, seed: u64) -> Self {
        Self {
            n_jobs,
            horizon,
            n,
            seed,
            pool_size: DEFAULT_POOL_SIZE,
            time_limit_secs: DEFAULT_TIME_LIMIT_SECS,
            generator: GeneratorConfig::default(),
        }
    }

    pub fn attempt_cap(&self) -> usize {
        ATTEMPTS_PER_INSTANCE * self.n
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub index: usize,
    pub instance_seed: u64,
    pub status: String,
    pub solutions: usize,
    pub best_qos: f64,
    pub nodes: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub n_jobs: usize,
    pub horizon: usize,
    pub seed: u64,
    pub requested: usize,
    pub accepted: usize,
    pub attempts: usize,
    pub rejected: usize,
    pub pool_size: usize,
    pub time_limit_secs: f64,
    pub instances: Vec<ManifestEntry>,
}

impl Manifest {
    pub fn load(dir: impl AsRef<Path>) -> Result<Self, PipelineError> {
        let text = read_text(dir.as_ref().join("manifest.json"))?;
        Ok(serde_json::from_str(&text)?)
    }
}

pub fn instance_path(dir: &Path, k: usize) -> PathBuf {
    dir.join(format!("instance_{k}.json"))
}

pub fn pool_path(dir: &Path, k: usize) -> PathBuf {
    dir.join(format!("pool_{k}.csv"))
}

pub fn candidates_path(dir: &Path, k: usize) -> PathBuf {
    dir.join(format!("candidates_{k}.csv"))
}

/// The directory a dataset with this seed is written to under `root`.
pub fn dataset_dir(root: &Path, seed: u64) -> PathBuf {
    root.join(seed.to_string())
}

/// Generates `cfg.n` accepted instances into `root/<seed>/`.
///
/// Instance seeds are drawn from one stream seeded with `cfg.seed`, one per
/// attempt. Solve timings are not stored, so equal seeds give byte-identical
/// files as long as no solve hits the time limit. When the attempt cap is
/// reached, the partial dataset and its manifest are still written and
/// [`PipelineError::AttemptCap`] is returned.
pub fn generate_dataset(cfg: &DatasetConfig, root: &Path) -> Result<Manifest, PipelineError> {
    if cfg.n == 0 {
        return Err(PipelineError::Invalid(
            "dataset size must be at least 1".into(),
        ));
    }
    if cfg.pool_size == 0 {
        return Err(PipelineError::Invalid(
            "pool size must be at least 1".into(),
        ));
    }
    let dir = dataset_dir(root, cfg.seed);
    std::fs::create_dir_all(&dir).map_err(|e| PipelineError::Io {
        path: dir.clone(),
        source: e,
    })?;
    let opts = SolveOptions {
        time_limit: Some(Duration::from_secs_f64(cfg.time_limit_secs)),
        ..SolveOptions::with_pool(cfg.pool_size)
    };
    let mut seeds = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut manifest = Manifest {
        n_jobs: cfg.n_jobs,
        horizon: cfg.horizon,
        seed: cfg.seed,
        requested: cfg.n,
        accepted: 0,
        attempts: 0,
        rejected: 0,
        pool_size: cfg.pool_size,
        time_limit_secs: cfg.time_limit_secs,
        instances: Vec::new(),
    };
    while manifest.accepted < cfg.n && manifest.attempts < cfg.attempt_cap() {
        manifest.attempts += 1;
        let instance_seed: u64 = seeds.gen();
        let inst = random_instance_with(cfg.n_jobs, cfg.horizon, instance_seed, &cfg.generator)?;
        let mut pool = solve_bb(&inst, &opts)?;
        if pool.is_empty() {
            manifest.rejected += 1;
            continue;
        }
        pool.time_to_first_feasible = None;
        let k = manifest.accepted;
        save_instance(&inst, instance_path(&dir, k))?;
        write_text(pool_path(&dir, k), &pool.to_csv())?;
        manifest.instances.push(ManifestEntry {
            index: k,
            instance_seed,
            status: pool.status.to_string(),
            solutions: pool.len(),
            best_qos: pool.best_qos().unwrap_or(0.0),
            nodes: pool.nodes_explored,
        });
        manifest.accepted += 1;
    }
    let text = serde_json::to_string_pretty(&manifest)?;
    write_text(dir.join("manifest.json"), &text)?;
    if manifest.accepted < cfg.n {
        return Err(PipelineError::AttemptCap {
            accepted: manifest.accepted,
            requested: cfg.n,
            attempts: manifest.attempts,
            dir,
        });
    }
    Ok(manifest)
}

/// One stored instance with its re-verified pool.
#[derive(Debug, Clone)]
pub struct Entry {
    pub index: usize,
    pub instance: Instance,
    pub pool: SolutionPool,
}

/// Loads every instance listed in the manifest of `dir`. Pool solutions are
/// re-checked for feasibility on load.
pub fn load_dataset(dir: impl AsRef<Path>) -> Result<Vec<Entry>, PipelineError> {
    let dir = dir.as_ref();
    let manifest = Manifest::load(dir)?;
    manifest
        .instances
        .iter()
        .map(|m| {
            let instance = load_instance(instance_path(dir, m.index))?;
            let text = read_text(pool_path(dir, m.index))?;
            let pool = SolutionPool::from_csv(&text, &instance).map_err(|e| {
                PipelineError::Corrupt(format!("{}: {e}", pool_path(dir, m.index).display()))
            })?;
            Ok(Entry {
                index: m.index,
                instance,
                pool,
            })
        })
        .collect()
}
