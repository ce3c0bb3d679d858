//! Graph fixtures for network tests.

#![allow(dead_code)]

use onts_core::standard_form::{Row, Sense, StandardForm, VarKind};
use onts_core::{encode_bipartite, BipartiteGraph, Family};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// The three-variable, three-constraint worked example.
pub fn worked_example() -> BipartiteGraph {
    let a = [[1.0, 2.0, 0.0], [0.0, 1.0, -1.0], [3.0, 0.0, 1.0]];
    let b = [2.0, 1.0, 4.0];
    let sf = StandardForm {
        var_names: vec!["x1".into(), "x2".into(), "x3".into()],
        var_kinds: vec![VarKind::Binary; 3],
        objective: vec![1.0, 2.0, 3.0],
        rows: (0..3)
            .map(|i| Row {
                coeffs: (0..3)
                    .filter(|&j| a[i][j] != 0.0)
                    .map(|j| (j, a[i][j]))
                    .collect(),
                sense: Sense::Le,
                rhs: b[i],
                family: Family::PowerLimit,
            })
            .collect(),
    };
    encode_bipartite(&sf, None).unwrap()
}

/// Random bipartite graph with random features; every variable node has at
/// least one edge.
pub fn random_graph(seed: u64, with_candidate: bool) -> BipartiteGraph {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n_var = rng.gen_range(4..12);
    let n_con = rng.gen_range(2..8);
    let mut edges = Vec::new();
    for c in 0..n_con {
        for v in 0..n_var {
            if rng.gen_bool(0.35) {
                let w = rng.gen_range(-3.0..3.0);
                edges.push((c, v, if w == 0.0 { 1.0 } else { w }));
            }
        }
    }
    for v in 0..n_var {
        if !edges.iter().any(|e| e.1 == v) {
            edges.push((rng.gen_range(0..n_con), v, rng.gen_range(0.5..2.0)));
        }
    }
    let mut deg_v = vec![0.0; n_var];
    let mut deg_c = vec![0.0; n_con];
    for &(c, v, _) in &edges {
        deg_v[v] += 1.0;
        deg_c[c] += 1.0;
    }
    let var_features = (0..n_var)
        .map(|v| {
            let mut f: Vec<f64> = (0..5).map(|_| rng.gen_range(-2.0..2.0)).collect();
            f[2] = deg_v[v];
            f.push(if rng.gen_bool(0.7) { 1.0 } else { 0.0 });
            if with_candidate {
                f.push(if rng.gen_bool(0.5) { 1.0 } else { 0.0 });
            }
            f
        })
        .collect();
    let con_features = (0..n_con)
        .map(|c| {
            vec![
                rng.gen_range(-5.0..5.0),
                rng.gen_range(-1.0..1.0),
                deg_c[c],
                if rng.gen_bool(0.3) { 1.0 } else { 0.0 },
            ]
        })
        .collect();
    BipartiteGraph {
        n_var,
        n_con,
        edges,
        var_features,
        con_features,
    }
}

/// Relabels nodes: new variable `i` is old `var_perm[i]`, new constraint `i`
/// is old `con_perm[i]`. Edge order is shuffled as well.
pub fn permute(
    g: &BipartiteGraph,
    var_perm: &[usize],
    con_perm: &[usize],
    seed: u64,
) -> BipartiteGraph {
    let inv = |perm: &[usize]| {
        let mut inv = vec![0; perm.len()];
        for (new, &old) in perm.iter().enumerate() {
            inv[old] = new;
        }
        inv
    };
    let (vi, ci) = (inv(var_perm), inv(con_perm));
    let mut edges: Vec<(usize, usize, f64)> =
        g.edges.iter().map(|&(c, v, w)| (ci[c], vi[v], w)).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for i in (1..edges.len()).rev() {
        edges.swap(i, rng.gen_range(0..=i));
    }
    BipartiteGraph {
        n_var: g.n_var,
        n_con: g.n_con,
        edges,
        var_features: var_perm
            .iter()
            .map(|&o| g.var_features[o].clone())
            .collect(),
        con_features: con_perm
            .iter()
            .map(|&o| g.con_features[o].clone())
            .collect(),
    }
}

pub fn random_perm(n: usize, rng: &mut ChaCha8Rng) -> Vec<usize> {
    let mut p: Vec<usize> = (0..n).collect();
    for i in (1..n).rev() {
        p.swap(i, rng.gen_range(0..=i));
    }
    p
}

/// Seeded Glorot weights with every entry, biases included, jittered by
/// `U(-0.1, 0.1)` so no pre-activation sits exactly on a rectifier kink.
pub fn random_params(config: &satgnn::SatGnnConfig, seed: u64) -> satgnn::ModelParams {
    let mut params = satgnn::ModelParams::init(&satgnn::SatGnnConfig {
        seed,
        ..config.clone()
    });
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0xabcdef);
    for v in &mut params.values {
        *v += rng.gen_range(-0.1..0.1);
    }
    params
}
