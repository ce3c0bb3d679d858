mod support;

use std::collections::BTreeMap;

use onts_core::instance_gen::{random_instance, reference_battery};
use onts_core::lp::{export_lp, parse_lp, parse_lp_str, write_lp};
use onts_core::standard_form::StandardForm;
use onts_core::{
    build_standard_form, encode_bipartite, BipartiteGraph, Family, Instance, JobParams,
};
use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn twenty_instances() -> Vec<Instance> {
    (0..20u64)
        .map(|k| {
            let j = 1 + (k as usize) % 3;
            let t = 3 + (k as usize) % 7;
            random_instance(j, t, 900 + k).unwrap()
        })
        .collect()
}

#[test]
fn lp_files_round_trip_exactly() {
    let dir = tempfile::tempdir().unwrap();
    for (k, inst) in twenty_instances().iter().enumerate() {
        let sf = build_standard_form(inst);
        let path = dir.path().join(format!("m{k}.lp"));
        export_lp(&sf, &path).unwrap();
        let back = parse_lp(&path).unwrap();
        assert_eq!(back.n_rows(), sf.n_rows());
        assert_eq!(back, sf, "instance {k}");
        assert_eq!(write_lp(&back), write_lp(&sf));
    }
}

#[test]
fn single_job_lp_round_trips() {
    let job = JobParams {
        u: 1.0,
        q: 1.0,
        y_min: 1,
        y_max: 3,
        t_min: 1,
        t_max: 3,
        p_min: 1,
        p_max: 3,
        w_min: 0,
        w_max: 3,
    };
    let inst = Instance::new(vec![job], vec![10.0; 3], reference_battery()).unwrap();
    let sf = build_standard_form(&inst);
    assert_eq!(sf.n_vars(), 10);
    assert_eq!(parse_lp_str(&write_lp(&sf)).unwrap(), sf);
}

#[test]
fn soc_coefficient_survives_at_seventeen_digits() {
    let mut b = reference_battery();
    b.e = 1.0;
    b.capacity = 1.0;
    b.v_b = 6.0;
    let coef = b.soc_per_watt();
    assert!((coef - 2.777_777_777_777_778e-3).abs() < 1e-15, "{coef}");
    let printed = format!("{coef:.16e}");
    assert_eq!(printed.parse::<f64>().unwrap().to_bits(), coef.to_bits());

    let base = random_instance(2, 5, 7).unwrap();
    let inst = base.with_battery(b).unwrap();
    let sf = build_standard_form(&inst);
    let back = parse_lp_str(&write_lp(&sf)).unwrap();
    let mut seen = 0;
    for (row, parsed) in sf.rows.iter().zip(&back.rows) {
        if row.family == Family::SocBalance {
            for (&(_, a), &(_, p)) in row.coeffs.iter().zip(&parsed.coeffs) {
                assert_eq!(a.to_bits(), p.to_bits());
                seen += 1;
            }
            assert_eq!(row.rhs.to_bits(), parsed.rhs.to_bits());
        }
    }
    assert!(seen > 0);
}

fn permute_rows(sf: &StandardForm, perm: &[usize]) -> StandardForm {
    let mut out = sf.clone();
    out.rows = perm.iter().map(|&i| sf.rows[i].clone()).collect();
    out
}

/// Constraint node signature: its features and its sorted incident weights.
type Signature = (Vec<u64>, Vec<(usize, u64)>);
type JobEdit = (&'static str, fn(&mut JobParams, i64));
type BatteryEdit = (&'static str, fn(&mut onts_core::BatteryParams));

fn con_signatures(g: &BipartiteGraph) -> Vec<Signature> {
    let mut incident: BTreeMap<usize, Vec<(usize, u64)>> = BTreeMap::new();
    for &(c, v, w) in &g.edges {
        incident.entry(c).or_default().push((v, w.to_bits()));
    }
    let mut sigs: Vec<_> = (0..g.n_con)
        .map(|c| {
            let feats = g.con_features[c].iter().map(|f| f.to_bits()).collect();
            let mut inc = incident.remove(&c).unwrap_or_default();
            inc.sort_unstable();
            (feats, inc)
        })
        .collect();
    sigs.sort();
    sigs
}

#[test]
fn graph_shape_matches_the_matrix() {
    for inst in twenty_instances() {
        let sf = build_standard_form(&inst);
        let g = encode_bipartite(&sf, None).unwrap();
        assert_eq!(g.n_var, sf.n_vars());
        assert_eq!(g.n_con, sf.n_rows());
        assert_eq!(g.edges.len(), sf.nnz());
        for &(c, v, w) in &g.edges {
            assert!(c < g.n_con && v < g.n_var);
            assert!(w != 0.0);
        }
    }
}

#[test]
fn row_permutation_permutes_constraint_nodes() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for inst in twenty_instances() {
        let sf = build_standard_form(&inst);
        let mut perm: Vec<usize> = (0..sf.n_rows()).collect();
        perm.shuffle(&mut rng);
        let g = encode_bipartite(&sf, None).unwrap();
        let h = encode_bipartite(&permute_rows(&sf, &perm), None).unwrap();
        assert_eq!(g.var_features, h.var_features);
        for (new, &old) in perm.iter().enumerate() {
            assert_eq!(h.con_features[new], g.con_features[old]);
        }
        assert_eq!(con_signatures(&g), con_signatures(&h));
    }
}

/// Every single-parameter change that keeps the instance valid.
fn perturbations(inst: &Instance) -> Vec<(String, Instance)> {
    let mut out = Vec::new();
    let mut push = |name: String, jobs: Vec<JobParams>, r: Vec<f64>, b| {
        if let Ok(i) = Instance::new(jobs, r, b) {
            out.push((name, i));
        }
    };
    let jobs = inst.jobs().to_vec();
    let r = inst.power().to_vec();
    let b = inst.battery().clone();
    for j in 0..jobs.len() {
        let fields: [JobEdit; 10] = [
            ("u", |p, d| p.u += d as f64 * 0.5),
            ("q", |p, d| p.q += d as f64 * 0.25),
            ("y_min", |p, d| {
                p.y_min = p.y_min.saturating_add_signed(d as isize)
            }),
            ("y_max", |p, d| {
                p.y_max = p.y_max.saturating_add_signed(d as isize)
            }),
            ("t_min", |p, d| {
                p.t_min = p.t_min.saturating_add_signed(d as isize)
            }),
            ("t_max", |p, d| {
                p.t_max = p.t_max.saturating_add_signed(d as isize)
            }),
            ("p_min", |p, d| {
                p.p_min = p.p_min.saturating_add_signed(d as isize)
            }),
            ("p_max", |p, d| {
                p.p_max = p.p_max.saturating_add_signed(d as isize)
            }),
            ("w_min", |p, d| {
                p.w_min = p.w_min.saturating_add_signed(d as isize)
            }),
            ("w_max", |p, d| {
                p.w_max = p.w_max.saturating_add_signed(d as isize)
            }),
        ];
        for (name, f) in fields {
            for d in [-1, 1] {
                let mut js = jobs.clone();
                f(&mut js[j], d);
                if js != jobs {
                    push(format!("job {j} {name} {d:+}"), js, r.clone(), b.clone());
                }
            }
        }
    }
    for t in 0..r.len() {
        let mut rr = r.clone();
        rr[t] += 0.5;
        push(format!("r_{t}"), jobs.clone(), rr, b.clone());
    }
    let battery: [BatteryEdit; 6] = [
        ("e", |b| b.e *= 0.9),
        ("Q", |b| b.capacity *= 1.1),
        ("gamma", |b| b.gamma *= 1.1),
        ("V_b", |b| b.v_b *= 1.1),
        ("rho", |b| b.rho = (b.rho + 0.05).min(b.soc_initial)),
        ("soc_initial", |b| {
            b.soc_initial = (b.soc_initial + b.rho) / 2.0
        }),
    ];
    for (name, f) in battery {
        let mut bb = b.clone();
        f(&mut bb);
        if bb != b {
            push(name.to_string(), jobs.clone(), r.clone(), bb);
        }
    }
    out
}

#[test]
fn encoding_separates_single_parameter_changes() {
    for inst in twenty_instances().iter().take(8) {
        let g = encode_bipartite(&build_standard_form(inst), None).unwrap();
        let variants = perturbations(inst);
        assert!(variants.len() > 10);
        for (name, other) in variants {
            let h = encode_bipartite(&build_standard_form(&other), None).unwrap();
            assert_ne!(g, h, "{name} left the graph unchanged");
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn lp_round_trip_holds_for_generated_instances(j in 1usize..4, t in 2usize..12, seed in 0u64..10_000) {
        let sf = build_standard_form(&random_instance(j, t, seed).unwrap());
        prop_assert_eq!(parse_lp_str(&write_lp(&sf)).unwrap(), sf);
    }
}
