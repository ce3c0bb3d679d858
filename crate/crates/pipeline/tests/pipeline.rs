use std::collections::BTreeMap;
use std::path::Path;
use std::process::Command;

use onts_core::{check_feasibility, CandidateSolution, GeneratorConfig};
use onts_pipeline::augment::{candidates_from_csv, candidates_to_csv};
use onts_pipeline::dataset::{dataset_dir, pool_path};
use onts_pipeline::{
    augment_candidates, bias_sample, feasibility_samples, generate_dataset, load_dataset,
    AugmentConfig, BiasLoss, DatasetConfig, PipelineError, Source,
};
use satgnn::Target;

fn small(n: usize, seed: u64) -> DatasetConfig {
    DatasetConfig {
        pool_size: 5,
        ..DatasetConfig::new(2, 6, n, seed)
    }
}

fn read_dir(dir: &Path) -> BTreeMap<String, Vec<u8>> {
    std::fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let e = e.unwrap();
            (
                e.file_name().to_string_lossy().into_owned(),
                std::fs::read(e.path()).unwrap(),
            )
        })
        .collect()
}

#[test]
fn single_instance_dataset() {
    let root = tempfile::tempdir().unwrap();
    let manifest = generate_dataset(&small(1, 3), root.path()).unwrap();
    assert_eq!(manifest.accepted, 1);
    assert_eq!(manifest.attempts, manifest.accepted + manifest.rejected);
    let dir = dataset_dir(root.path(), 3);
    let files: Vec<String> = read_dir(&dir).into_keys().collect();
    assert_eq!(
        files,
        vec!["instance_0.json", "manifest.json", "pool_0.csv"]
    );
    let entries = load_dataset(&dir).unwrap();
    assert_eq!(entries.len(), 1);
    assert!(!entries[0].pool.is_empty());
}

#[test]
fn same_seed_same_bytes() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    generate_dataset(&small(4, 21), a.path()).unwrap();
    generate_dataset(&small(4, 21), b.path()).unwrap();
    let da = read_dir(&dataset_dir(a.path(), 21));
    assert_eq!(da, read_dir(&dataset_dir(b.path(), 21)));
    let c = tempfile::tempdir().unwrap();
    generate_dataset(&small(4, 22), c.path()).unwrap();
    assert_ne!(da, read_dir(&dataset_dir(c.path(), 22)));
}

#[test]
fn hopeless_generator_is_rejected_up_to_the_cap() {
    let root = tempfile::tempdir().unwrap();
    let cfg = DatasetConfig {
        generator: GeneratorConfig {
            power_ratio: 0.01,
            reserve_watt_steps: Some(0.0),
            ..GeneratorConfig::default()
        },
        ..small(2, 5)
    };
    match generate_dataset(&cfg, root.path()) {
        Err(PipelineError::AttemptCap {
            accepted, attempts, ..
        }) => {
            assert_eq!(accepted, 0);
            assert_eq!(attempts, 200);
        }
        other => panic!("expected attempt cap, got {other:?}"),
    }
    let dir = dataset_dir(root.path(), 5);
    let files: Vec<String> = read_dir(&dir).into_keys().collect();
    assert_eq!(files, vec!["manifest.json"]);
}

#[test]
fn corrupted_pool_is_caught_on_load() {
    let root = tempfile::tempdir().unwrap();
    generate_dataset(&small(1, 8), root.path()).unwrap();
    let dir = dataset_dir(root.path(), 8);
    let path = pool_path(&dir, 0);
    let text = std::fs::read_to_string(&path).unwrap();
    let last = text.lines().last().unwrap().to_string();
    let flipped: String = last
        .chars()
        .rev()
        .enumerate()
        .map(|(i, c)| match (i, c) {
            (0..=4, '0') => '1',
            (0..=4, '1') => '0',
            _ => c,
        })
        .collect::<Vec<_>>()
        .into_iter()
        .rev()
        .collect();
    std::fs::write(&path, text.replace(&last, &flipped)).unwrap();
    assert!(matches!(load_dataset(&dir), Err(PipelineError::Corrupt(_))));
}

#[test]
fn augmentation_counts_and_labels() {
    let root = tempfile::tempdir().unwrap();
    generate_dataset(&small(2, 13), root.path()).unwrap();
    for e in load_dataset(dataset_dir(root.path(), 13)).unwrap() {
        let pool: Vec<Vec<u8>> = e.pool.solutions.iter().map(|s| s.solution.z()).collect();
        let cfg = AugmentConfig {
            n_random: 30,
            n_neighbor: 40,
            eta: Some(3),
            seed: 1,
        };
        let cands = augment_candidates(&e.instance, &pool, &cfg).unwrap();
        let count = |s| cands.iter().filter(|c| c.source == s).count();
        assert_eq!(count(Source::Pool), pool.len());
        assert_eq!(count(Source::Random), 30);
        assert_eq!(count(Source::Neighbor), 40);
        for c in &cands {
            let sol = CandidateSolution::from_z(2, 6, &c.z).unwrap();
            assert_eq!(
                check_feasibility(&e.instance, &sol).unwrap().feasible(),
                c.feasible
            );
            if c.source == Source::Pool {
                assert!(c.feasible);
            }
            if c.source == Source::Neighbor {
                let d = pool
                    .iter()
                    .map(|z| z.iter().zip(&c.z).filter(|(a, b)| a != b).count())
                    .min()
                    .unwrap();
                assert!((1..=3).contains(&d) || pool.contains(&c.z));
            }
        }
        let text = candidates_to_csv(&cands);
        assert_eq!(candidates_from_csv(&text, &e.instance).unwrap(), cands);
        assert_eq!(augment_candidates(&e.instance, &pool, &cfg).unwrap(), cands);

        let only_pool = AugmentConfig {
            n_random: 0,
            n_neighbor: 0,
            ..cfg.clone()
        };
        let c0 = augment_candidates(&e.instance, &pool, &only_pool).unwrap();
        assert!(c0.iter().all(|c| c.source == Source::Pool && c.feasible));
        assert_eq!(c0.len(), pool.len());

        let bad = AugmentConfig {
            eta: Some(0),
            ..cfg.clone()
        };
        assert!(matches!(
            augment_candidates(&e.instance, &pool, &bad),
            Err(PipelineError::Invalid(_))
        ));
        assert!(augment_candidates(&e.instance, &[], &cfg).is_err());
    }
}

#[test]
fn flipping_a_closed_window_cell_is_infeasible() {
    let root = tempfile::tempdir().unwrap();
    generate_dataset(&small(3, 17), root.path()).unwrap();
    let mut checked = 0;
    for e in load_dataset(dataset_dir(root.path(), 17)).unwrap() {
        let inst = &e.instance;
        let z = e.pool.solutions[0].solution.z();
        for j in 0..inst.n_jobs() {
            for s in 0..inst.horizon() {
                if inst.job(j).in_window(s) {
                    continue;
                }
                let k = j * inst.horizon() + s;
                assert_eq!(z[k], 0);
                let mut flipped = z.clone();
                flipped[k] = 1;
                let sol =
                    CandidateSolution::from_z(inst.n_jobs(), inst.horizon(), &flipped).unwrap();
                assert!(!check_feasibility(inst, &sol).unwrap().feasible());
                checked += 1;
            }
        }
    }
    assert!(checked > 0, "no closed window cells in the sample");
}

#[test]
fn samples_match_the_tasks() {
    let root = tempfile::tempdir().unwrap();
    generate_dataset(&small(1, 30), root.path()).unwrap();
    let e = &load_dataset(dataset_dir(root.path(), 30)).unwrap()[0];
    let pool: Vec<Vec<u8>> = e.pool.solutions.iter().map(|s| s.solution.z()).collect();
    let cfg = AugmentConfig {
        n_random: 3,
        n_neighbor: 3,
        eta: None,
        seed: 2,
    };
    let cands = augment_candidates(&e.instance, &pool, &cfg).unwrap();
    let feas = feasibility_samples(&e.instance, &cands).unwrap();
    assert_eq!(feas.len(), cands.len());
    for (s, c) in feas.iter().zip(&cands) {
        assert_eq!(s.graph.var_in, 7);
        assert_eq!(
            s.target,
            Target::Feasible(if c.feasible { 1.0 } else { 0.0 })
        );
    }
    let best = bias_sample(&e.instance, &e.pool, BiasLoss::Best).unwrap();
    assert_eq!(best.target, Target::Best(pool[0].clone()));
    match bias_sample(&e.instance, &e.pool, BiasLoss::Pool)
        .unwrap()
        .target
    {
        Target::Pool { solutions, weights } => {
            assert_eq!(solutions, pool);
            assert!((weights.iter().sum::<f64>() - 1.0).abs() < 1e-9);
        }
        other => panic!("unexpected {other:?}"),
    }
}

fn onts(args: &[&str], cwd: &Path) -> (i32, String, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_onts"))
        .args(args)
        .current_dir(cwd)
        .output()
        .unwrap();
    (
        out.status.code().unwrap(),
        String::from_utf8(out.stdout).unwrap(),
        String::from_utf8(out.stderr).unwrap(),
    )
}

#[test]
fn cli_round_trip_and_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    // Find a seed whose instance is feasible and one that is not.
    let mut feasible = None;
    let mut infeasible = None;
    for seed in 0..40 {
        let s = seed.to_string();
        let name = format!("i{seed}.json");
        assert_eq!(
            onts(
                &[
                    "gen",
                    "--jobs",
                    "2",
                    "--horizon",
                    "6",
                    "--seed",
                    &s,
                    "--out",
                    &name
                ],
                d
            )
            .0,
            0
        );
        let (code, _, _) = onts(&["solve", &name, "--pool", "3", "--quiet"], d);
        match code {
            0 if feasible.is_none() => feasible = Some(name),
            1 if infeasible.is_none() => infeasible = Some(name),
            0 | 1 => {}
            other => panic!("unexpected exit {other}"),
        }
    }
    let (feasible, infeasible) = (feasible.unwrap(), infeasible.unwrap());

    let (code, pool, _) = onts(&["solve", &feasible, "--pool", "3"], d);
    assert_eq!(code, 0);
    assert!(pool.starts_with("# status=optimal"));
    std::fs::write(d.join("pool.csv"), &pool).unwrap();
    let (code, text, _) = onts(&["check", &feasible, "pool.csv"], d);
    assert_eq!(code, 0, "{text}");
    assert!(text.starts_with("feasible"));
    let (code, chart, _) = onts(&["gantt", &feasible, "pool.csv"], d);
    assert_eq!(code, 0);
    assert_eq!(chart.lines().count(), 3);
    assert!(chart.contains('█'));

    assert_eq!(onts(&["solve", &infeasible], d).0, 1);
    let (code, lp, _) = onts(&["export-lp", &feasible], d);
    assert_eq!(code, 0);
    assert!(lp.contains("Subject To") && lp.ends_with("End\n"));
    let (code, graph, _) = onts(&["encode", &feasible], d);
    assert_eq!(code, 0);
    assert!(graph.starts_with("{\"n_var\":"));

    // A node limit of one stops before any solution.
    assert_eq!(onts(&["solve", &feasible, "--node-limit", "1"], d).0, 3);
    assert_eq!(onts(&["solve", "missing.json"], d).0, 2);
    assert_eq!(onts(&["solve", &feasible, "--pool", "0"], d).0, 2);
    assert_eq!(onts(&["frobnicate"], d).0, 2);
    std::fs::write(d.join("bad.csv"), "j,t,x,phi\n1,1,2,0\n").unwrap();
    assert_eq!(onts(&["check", &feasible, "bad.csv"], d).0, 2);
}

#[test]
fn cli_pipeline_end_to_end() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let run = |args: &[&str]| {
        let (code, out, err) = onts(args, d);
        assert_eq!(code, 0, "{args:?}: {err}");
        out
    };
    run(&[
        "dataset",
        "--jobs",
        "2",
        "--horizon",
        "6",
        "--n",
        "3",
        "--pool",
        "5",
        "--seed",
        "4",
        "--out",
        "ds",
        "--quiet",
    ]);
    run(&[
        "augment",
        "ds/4",
        "--random",
        "10",
        "--neighbor",
        "10",
        "--quiet",
    ]);
    assert!(d.join("ds/4/candidates_2.csv").exists());
    run(&[
        "train",
        "ds/4",
        "--task",
        "feasibility",
        "--epochs",
        "3",
        "--out",
        "f.json",
        "--quiet",
    ]);
    run(&[
        "train", "ds/4", "--task", "bias", "--epochs", "3", "--out", "b.json", "--quiet",
    ]);
    let history = std::fs::read_to_string(d.join("b.json.history.csv")).unwrap();
    assert!(history.starts_with("epoch,train_loss,val_loss\n0,"));
    let probs = run(&["predict", "ds/4/instance_0.json", "b.json"]);
    assert_eq!(probs.lines().count(), 1 + 24);
    let p = run(&[
        "predict",
        "ds/4/instance_0.json",
        "f.json",
        "--candidate",
        "ds/4/pool_0.csv",
    ]);
    let p: f64 = p.trim().parse().unwrap();
    assert!(p > 0.0 && p < 1.0);
    let (code, pool, _) = onts(
        &[
            "heur",
            "ds/4/instance_0.json",
            "b.json",
            "--mode",
            "warm",
            "--pool",
            "2",
        ],
        d,
    );
    assert_eq!(code, 0);
    assert!(pool.starts_with("# status=optimal"));
    let (code, _, _) = onts(
        &["heur", "ds/4/instance_0.json", "f.json", "--mode", "fix"],
        d,
    );
    assert_eq!(code, 2);
}
