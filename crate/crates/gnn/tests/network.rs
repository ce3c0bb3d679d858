mod support;

use onts_core::BipartiteGraph;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use satgnn::{
    forward, grad_check, loss, loss_and_grad, solution_weights, train, Aggregation, ConvKind,
    GnnError, ModelParams, PreparedGraph, Sample, SatGnn, SatGnnConfig, Target, Task,
};
use support::graphs::{permute, random_graph, random_params, random_perm, worked_example};

fn config(task: Task, conv: ConvKind, agg: Aggregation, layers: usize, d: usize) -> SatGnnConfig {
    SatGnnConfig {
        d,
        layers,
        conv_kind: conv,
        aggregation: agg,
        share_conv_params: false,
        task,
        learning_rate: 1e-2,
        max_epochs: 20,
        seed: 3,
        batch_size: 1,
        gcn_normalize: true,
    }
}

fn all_configs(task: Task) -> Vec<SatGnnConfig> {
    let mut out = Vec::new();
    for layers in [1, 2] {
        out.push(config(task, ConvKind::Gcn, Aggregation::Sum, layers, 4));
        for agg in [Aggregation::Mean, Aggregation::Max, Aggregation::Sum] {
            out.push(config(task, ConvKind::Sage, agg, layers, 4));
        }
    }
    let mut shared = config(task, ConvKind::Sage, Aggregation::Mean, 3, 4);
    shared.share_conv_params = true;
    out.push(shared);
    out
}

fn bias_target(g: &PreparedGraph, seed: u64) -> Target {
    Target::Best(
        (0..g.binary.len())
            .map(|i| (seed as usize + i * 7).is_multiple_of(3) as u8)
            .collect(),
    )
}

#[test]
fn zero_parameters_give_one_half() {
    let g = PreparedGraph::new(&worked_example());
    let cfg = config(Task::Bias, ConvKind::Sage, Aggregation::Mean, 2, 5);
    let out = forward(&ModelParams::zeros(&cfg), &cfg, &g).unwrap();
    assert_eq!(out, vec![0.5; 3]);

    let gf = PreparedGraph::new(&random_graph(1, true));
    let cfg = config(Task::Feasibility, ConvKind::Gcn, Aggregation::Sum, 1, 8);
    assert_eq!(
        forward(&ModelParams::zeros(&cfg), &cfg, &gf).unwrap(),
        vec![0.5]
    );
}

#[test]
fn isolated_variable_ignores_convolution_weights() {
    let g = BipartiteGraph {
        n_var: 1,
        n_con: 0,
        edges: vec![],
        var_features: vec![vec![2.0, 0.0, 0.0, 0.0, 0.0, 1.0]],
        con_features: vec![],
    };
    let g = PreparedGraph::new(&g);
    let cfg = config(Task::Bias, ConvKind::Gcn, Aggregation::Sum, 1, 4);
    let mut a = SatGnn::new(cfg.clone()).unwrap();
    a.params
        .tensor_mut("conv0.c2v.bias")
        .unwrap()
        .copy_from_slice(&[0.3, -0.2, 0.5, 0.1]);
    let mut b = a.clone();
    for name in [
        "conv0.c2v.weight",
        "conv0.v2c.weight",
        "conv0.v2c.bias",
        "enc_con.weight",
    ] {
        for (i, v) in b.params.tensor_mut(name).unwrap().iter_mut().enumerate() {
            *v += 0.37 * (i as f64 + 1.0);
        }
    }
    let pa = forward(&a.params, &cfg, &g).unwrap();
    let pb = forward(&b.params, &cfg, &g).unwrap();
    assert_eq!(pa, pb);
    assert!(pa[0] > 0.0 && pa[0] < 1.0);
}

#[test]
fn worked_example_constraint_relabeling() {
    let g = worked_example();
    let swapped = permute(&g, &[0, 1, 2], &[1, 0, 2], 5);
    for cfg in all_configs(Task::Bias) {
        let params = ModelParams::init(&cfg);
        let a = forward(&params, &cfg, &PreparedGraph::new(&g)).unwrap();
        let b = forward(&params, &cfg, &PreparedGraph::new(&swapped)).unwrap();
        for (x, y) in a.iter().zip(&b) {
            assert!((x - y).abs() <= 1e-12, "{cfg:?}: {a:?} vs {b:?}");
        }
    }
}

#[test]
fn bias_outputs_are_permutation_equivariant() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for seed in 0..10 {
        let g = random_graph(seed, false);
        let vp = random_perm(g.n_var, &mut rng);
        let cp = random_perm(g.n_con, &mut rng);
        let h = permute(&g, &vp, &cp, seed);
        let (pg, ph) = (PreparedGraph::new(&g), PreparedGraph::new(&h));
        for cfg in all_configs(Task::Bias) {
            let params = ModelParams::init(&cfg);
            let a = forward(&params, &cfg, &pg).unwrap();
            let b = forward(&params, &cfg, &ph).unwrap();
            for (i, &new_node) in ph.binary.iter().enumerate() {
                let old_pos = pg.binary.iter().position(|&v| v == vp[new_node]).unwrap();
                assert!((b[i] - a[old_pos]).abs() <= 1e-12);
                assert!(b[i] > 0.0 && b[i] < 1.0);
            }
        }
    }
}

#[test]
fn feasibility_output_is_permutation_invariant() {
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    for seed in 0..10 {
        let g = random_graph(100 + seed, true);
        let h = permute(
            &g,
            &random_perm(g.n_var, &mut rng),
            &random_perm(g.n_con, &mut rng),
            seed,
        );
        for cfg in all_configs(Task::Feasibility) {
            let params = ModelParams::init(&cfg);
            let a = forward(&params, &cfg, &PreparedGraph::new(&g)).unwrap()[0];
            let b = forward(&params, &cfg, &PreparedGraph::new(&h)).unwrap()[0];
            assert!((a - b).abs() <= 1e-12);
        }
    }
}

#[test]
fn gcn_matches_sage_sum_without_root_weight() {
    let g = BipartiteGraph {
        n_var: 2,
        n_con: 1,
        edges: vec![(0, 0, 1.5), (0, 1, -2.0)],
        var_features: vec![
            vec![1.0, 1.5, 1.0, 1.5, 1.5, 1.0],
            vec![0.0, -2.0, 1.0, -2.0, -2.0, 1.0],
        ],
        con_features: vec![vec![3.0, -0.25, 2.0, 0.0]],
    };
    let g = PreparedGraph::new(&g);
    for layers in [1, 2] {
        let mut gcn = config(Task::Bias, ConvKind::Gcn, Aggregation::Sum, layers, 4);
        gcn.gcn_normalize = false;
        let sage = config(Task::Bias, ConvKind::Sage, Aggregation::Sum, layers, 4);
        let pg = ModelParams::init(&gcn);
        let mut ps = ModelParams::zeros(&sage);
        for spec in pg.specs() {
            ps.tensor_mut(&spec.name)
                .unwrap()
                .copy_from_slice(pg.tensor(&spec.name).unwrap());
        }
        assert!(ps
            .specs()
            .iter()
            .filter(|s| s.name.ends_with("self_weight"))
            .all(|s| ps.tensor(&s.name).unwrap().iter().all(|&v| v == 0.0)));
        let a = forward(&pg, &gcn, &g).unwrap();
        let b = forward(&ps, &sage, &g).unwrap();
        assert_eq!(a, b);
    }
}

/// Max aggregation is not differentiable where two messages tie, which
/// happens at every channel where several neighbours sit at a dead ReLU, and
/// unnormalized sums put more ReLU kinks within one step of the point.
/// Away from those points the gradient must agree.
#[test]
fn max_and_sum_aggregation_gradients_agree_off_kinks() {
    const STEP: f64 = 1e-5;
    for seed in 0..3 {
        let g = PreparedGraph::new(&random_graph(200 + seed, false));
        for (agg, layers) in [
            (Aggregation::Max, 1),
            (Aggregation::Max, 2),
            (Aggregation::Sum, 1),
            (Aggregation::Sum, 2),
        ] {
            let cfg = config(Task::Bias, ConvKind::Sage, agg, layers, 4);
            let sample = Sample {
                target: bias_target(&g, seed),
                graph: g.clone(),
            };
            let batch = std::slice::from_ref(&sample);
            let params = random_params(&cfg, seed);
            let (_, analytic) = loss_and_grad(&params, &cfg, batch).unwrap();
            let mut errors = Vec::new();
            for (k, &a) in analytic.iter().enumerate() {
                let mut probe = params.clone();
                probe.values[k] += STEP;
                let up = loss(&probe, &cfg, batch).unwrap();
                probe.values[k] -= 2.0 * STEP;
                let down = loss(&probe, &cfg, batch).unwrap();
                let n = (up - down) / (2.0 * STEP);
                errors.push((a - n).abs() / a.abs().max(n.abs()).max(1e-8));
            }
            errors.sort_by(f64::total_cmp);
            let median = errors[errors.len() / 2];
            let within = errors.iter().filter(|&&e| e < 1e-4).count();
            assert!(
                median < 1e-6,
                "{agg:?} seed {seed} L={layers}: median {median}"
            );
            assert!(
                within * 10 >= errors.len() * 9,
                "{agg:?} seed {seed} L={layers}: {within}/{} within 1e-4",
                errors.len()
            );
        }
    }
}

#[test]
fn gradients_match_finite_differences() {
    for seed in 0..3 {
        let gb = PreparedGraph::new(&random_graph(seed, false));
        let gf = PreparedGraph::new(&random_graph(seed, true));
        for task in [Task::Bias, Task::Feasibility] {
            for cfg in all_configs(task)
                .into_iter()
                .filter(|c| c.conv_kind == ConvKind::Gcn || c.aggregation == Aggregation::Mean)
            {
                let sample = match task {
                    Task::Bias => Sample {
                        target: bias_target(&gb, seed),
                        graph: gb.clone(),
                    },
                    Task::Feasibility => Sample {
                        graph: gf.clone(),
                        target: Target::Feasible((seed % 2) as f64),
                    },
                };
                let params = random_params(&cfg, seed);
                let err = grad_check(&params, &cfg, &sample, params.len(), seed).unwrap();
                assert!(err < 1e-4, "{cfg:?}: {err}");
            }
        }
    }
}

#[test]
fn pool_gradients_match_finite_differences() {
    let g = PreparedGraph::new(&random_graph(77, false));
    let n = g.binary.len();
    let solutions: Vec<Vec<u8>> = (0..3)
        .map(|k| (0..n).map(|i| ((i + k) % 2) as u8).collect())
        .collect();
    let weights = solution_weights(&[1.0, 2.0, 0.5]).unwrap();
    let sample = Sample {
        graph: g,
        target: Target::Pool { solutions, weights },
    };
    let cfg = config(Task::Bias, ConvKind::Sage, Aggregation::Mean, 2, 4);
    let err = grad_check(&random_params(&cfg, 4), &cfg, &sample, 200, 1).unwrap();
    assert!(err < 1e-4, "{err}");
}

#[test]
fn solution_weight_examples() {
    assert_eq!(solution_weights(&[4.0, 4.0]).unwrap(), vec![0.5, 0.5]);
    assert_eq!(solution_weights(&[7.0]).unwrap(), vec![1.0]);
    let w = solution_weights(&[0.0, 3f64.ln()]).unwrap();
    assert!((w[0] - 0.25).abs() < 1e-15 && (w[1] - 0.75).abs() < 1e-15);
    let w = solution_weights(&[1000.0, 999.0, -5.0]).unwrap();
    assert!((w.iter().sum::<f64>() - 1.0).abs() <= 1e-9);
    assert!(matches!(solution_weights(&[]), Err(GnnError::EmptyPool)));
}

#[test]
fn loss_examples() {
    let g = PreparedGraph::new(&worked_example());
    let cfg = config(Task::Bias, ConvKind::Sage, Aggregation::Mean, 1, 4);
    let zero = ModelParams::zeros(&cfg);
    let ones = Sample {
        graph: g.clone(),
        target: Target::Best(vec![1, 1, 1]),
    };
    let half = loss(&zero, &cfg, std::slice::from_ref(&ones)).unwrap();
    assert!((half - std::f64::consts::LN_2).abs() < 1e-15);

    let mut confident = zero.clone();
    confident.tensor_mut("head.2.bias").unwrap()[0] = 60.0;
    let perfect = loss(&confident, &cfg, std::slice::from_ref(&ones)).unwrap();
    assert!(perfect <= 1e-10, "{perfect}");

    let params = ModelParams::init(&cfg);
    let z = vec![1, 0, 1];
    let best = Sample {
        graph: g.clone(),
        target: Target::Best(z.clone()),
    };
    let pool = Sample {
        graph: g,
        target: Target::Pool {
            solutions: vec![z.clone(), z.clone(), z],
            weights: solution_weights(&[2.0, 2.0, 2.0]).unwrap(),
        },
    };
    let a = loss(&params, &cfg, &[best]).unwrap();
    let b = loss(&params, &cfg, &[pool]).unwrap();
    assert!((a - b).abs() <= 1e-12);
}

#[test]
fn mismatches_are_errors() {
    let gb = PreparedGraph::new(&worked_example());
    let feas = config(Task::Feasibility, ConvKind::Gcn, Aggregation::Sum, 1, 4);
    assert!(matches!(
        forward(&ModelParams::init(&feas), &feas, &gb),
        Err(GnnError::Shape(_))
    ));
    let bias = config(Task::Bias, ConvKind::Gcn, Aggregation::Sum, 1, 4);
    let wrong = Sample {
        graph: gb.clone(),
        target: Target::Best(vec![1, 0]),
    };
    assert!(matches!(
        loss(&ModelParams::init(&bias), &bias, &[wrong]),
        Err(GnnError::TargetMismatch(_))
    ));
    let other = config(Task::Bias, ConvKind::Sage, Aggregation::Sum, 1, 4);
    assert!(forward(&ModelParams::init(&other), &bias, &gb).is_err());
    let mut bad = bias.clone();
    bad.d = 0;
    assert!(SatGnn::new(bad).is_err());
}

fn feasibility_samples(count: u64) -> Vec<Sample> {
    (0..count)
        .map(|k| Sample {
            graph: PreparedGraph::new(&random_graph(400 + k, true)),
            target: Target::Feasible((k % 2) as f64),
        })
        .collect()
}

#[test]
fn zero_learning_rate_keeps_parameters() {
    let mut cfg = SatGnnConfig::feasibility();
    cfg.learning_rate = 0.0;
    cfg.max_epochs = 3;
    let data = feasibility_samples(4);
    let (model, history) = train(&cfg, &data, &[]).unwrap();
    assert_eq!(model.params, SatGnn::new(cfg).unwrap().params);
    assert_eq!(history.epochs.len(), 4);
}

#[test]
fn single_sample_loss_decreases() {
    let mut cfg = SatGnnConfig::feasibility();
    cfg.d = 4;
    cfg.max_epochs = 20;
    cfg.learning_rate = 1e-2;
    let data = feasibility_samples(1);
    let (_, history) = train(&cfg, &data, &[]).unwrap();
    let first = history.epochs[0].train_loss;
    let last = history.epochs.last().unwrap().train_loss;
    assert!(last <= first + 1e-6, "{first} -> {last}");
    assert!(last < first);
}

#[test]
fn training_is_deterministic_and_serializable() {
    let mut cfg = SatGnnConfig::bias();
    cfg.max_epochs = 3;
    cfg.d = 4;
    let data: Vec<Sample> = (0..5)
        .map(|k| {
            let g = PreparedGraph::new(&random_graph(500 + k, false));
            Sample {
                target: bias_target(&g, k),
                graph: g,
            }
        })
        .collect();
    let (m1, h1) = train(&cfg, &data[..4], &data[4..]).unwrap();
    let (m2, h2) = train(&cfg, &data[..4], &data[4..]).unwrap();
    assert_eq!(h1, h2);
    assert_eq!(h1.to_csv(), h2.to_csv());
    assert!(h1.to_csv().starts_with("epoch,train_loss,val_loss\n0,"));
    assert_eq!(m1, m2);
    let back = SatGnn::from_json(&m1.to_json()).unwrap();
    assert_eq!(back, m1);
    let best = h1
        .epochs
        .iter()
        .map(|e| e.val_loss)
        .fold(f64::INFINITY, f64::min);
    assert_eq!(loss(&m1.params, &cfg, &data[4..]).unwrap(), best);
}

#[test]
fn corrupt_model_json_is_rejected() {
    let model = SatGnn::new(SatGnnConfig::feasibility()).unwrap();
    let text = model
        .to_json()
        .replacen("\"enc_var.weight\"", "\"renamed\"", 1);
    assert!(SatGnn::from_json(&text).is_err());
    assert!(SatGnn::from_json("{").is_err());
}

proptest! {
    #[test]
    fn solution_weights_are_a_distribution_ordered_like_qos(
        qos in proptest::collection::vec(-50.0f64..50.0, 1..30),
    ) {
        let w = solution_weights(&qos).unwrap();
        prop_assert!((w.iter().sum::<f64>() - 1.0).abs() <= 1e-9);
        for i in 0..qos.len() {
            prop_assert!(w[i] >= 0.0);
            for j in 0..qos.len() {
                if qos[i] > qos[j] {
                    prop_assert!(w[i] >= w[j]);
                }
            }
        }
    }

    #[test]
    fn outputs_lie_strictly_inside_the_unit_interval(
        graph_seed in 0u64..1000,
        param_seed: u64,
        layers in 1usize..3,
        pick in 0usize..4,
        feasibility: bool,
    ) {
        let task = if feasibility { Task::Feasibility } else { Task::Bias };
        let (conv, agg) = [
            (ConvKind::Gcn, Aggregation::Sum),
            (ConvKind::Sage, Aggregation::Mean),
            (ConvKind::Sage, Aggregation::Max),
            (ConvKind::Sage, Aggregation::Sum),
        ][pick];
        let cfg = SatGnnConfig { seed: param_seed, ..config(task, conv, agg, layers, 4) };
        let g = PreparedGraph::new(&random_graph(graph_seed, feasibility));
        let out = forward(&ModelParams::init(&cfg), &cfg, &g).unwrap();
        prop_assert_eq!(out.len(), if feasibility { 1 } else { g.binary.len() });
        for p in out {
            prop_assert!(p > 0.0 && p < 1.0, "{}", p);
        }
    }
}

#[test]
fn saturated_logits_stay_inside_the_unit_interval() {
    let cfg = config(Task::Bias, ConvKind::Sage, Aggregation::Sum, 1, 4);
    let g = PreparedGraph::new(&random_graph(167, false));
    let mut params = ModelParams::init(&cfg);
    for v in &mut params.values {
        *v *= 50.0;
    }
    let out = forward(&params, &cfg, &g).unwrap();
    assert!(out.iter().any(|&p| p == 1.0 - 1e-12 || p == 1e-12));
    assert!(out.iter().all(|&p| p > 0.0 && p < 1.0));
}
