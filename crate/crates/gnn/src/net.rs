//! Forward pass with a trace of intermediate values, and the matching
//! reverse-mode pass.
//!
//! Each layer first updates constraint nodes from their variable neighbors,
//! then variable nodes from the updated constraint nodes. Messages are the
//! neighbor states scaled by the edge weight `A_ij`.

use crate::config::{Aggregation, ConvKind, SatGnnConfig, Task};
use crate::params::{Conv, Lin, ModelParams};
use crate::prepared::PreparedGraph;
use crate::GnnError;

const NO_EDGE: usize = usize::MAX;

/// `y = x W + b` for `n` rows.
fn affine(x: &[f64], n: usize, p: &[f64], lin: Lin) -> Vec<f64> {
    let (fin, fout) = (lin.fin, lin.fout);
    let w = &p[lin.w..lin.w + fin * fout];
    let b = &p[lin.b..lin.b + fout];
    let mut y = Vec::with_capacity(n * fout);
    for _ in 0..n {
        y.extend_from_slice(b);
    }
    matmul_acc(x, n, fin, w, fout, &mut y);
    y
}

/// `y += x W`.
fn matmul_acc(x: &[f64], n: usize, fin: usize, w: &[f64], fout: usize, y: &mut [f64]) {
    for i in 0..n {
        let yi = &mut y[i * fout..(i + 1) * fout];
        for k in 0..fin {
            let xv = x[i * fin + k];
            if xv == 0.0 {
                continue;
            }
            for (yo, wo) in yi.iter_mut().zip(&w[k * fout..(k + 1) * fout]) {
                *yo += xv * wo;
            }
        }
    }
}

/// Accumulates `gW += x^T dy` and returns `dy W^T`.
fn matmul_back(
    x: &[f64],
    n: usize,
    fin: usize,
    w: &[f64],
    fout: usize,
    dy: &[f64],
    gw: &mut [f64],
) -> Vec<f64> {
    let mut dx = vec![0.0; n * fin];
    for i in 0..n {
        let dyi = &dy[i * fout..(i + 1) * fout];
        for k in 0..fin {
            let xv = x[i * fin + k];
            let wr = &w[k * fout..(k + 1) * fout];
            let gr = &mut gw[k * fout..(k + 1) * fout];
            let mut acc = 0.0;
            for o in 0..fout {
                gr[o] += xv * dyi[o];
                acc += dyi[o] * wr[o];
            }
            dx[i * fin + k] = acc;
        }
    }
    dx
}

fn relu(pre: &[f64]) -> Vec<f64> {
    pre.iter().map(|&v| v.max(0.0)).collect()
}

fn relu_back(pre: &[f64], dy: &[f64]) -> Vec<f64> {
    pre.iter()
        .zip(dy)
        .map(|(&p, &d)| if p > 0.0 { d } else { 0.0 })
        .collect()
}

fn bias_back(dy: &[f64], fout: usize, gb: &mut [f64]) {
    for row in dy.chunks(fout) {
        for (g, d) in gb.iter_mut().zip(row) {
            *g += d;
        }
    }
}

/// Reported probabilities and the loss are clamped to `[PROB_CLAMP, 1 - PROB_CLAMP]`.
pub(crate) const PROB_CLAMP: f64 = 1e-12;

pub(crate) fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

/// Which scaling a convolution applies to edge `(t, s, w)`.
#[derive(Clone, Copy)]
enum EdgeScale {
    /// `w / sqrt(deg t * deg s)`.
    Normalized,
    /// `w / deg t`.
    Mean,
    /// `w`.
    Raw,
}

struct Direction<'g> {
    edges: &'g [(usize, usize, f64)],
    n_tgt: usize,
    deg_tgt: &'g [usize],
    deg_src: &'g [usize],
}

impl Direction<'_> {
    fn coef(&self, scale: EdgeScale, t: usize, s: usize, w: f64) -> f64 {
        match scale {
            EdgeScale::Normalized => w / ((self.deg_tgt[t] * self.deg_src[s]) as f64).sqrt(),
            EdgeScale::Mean => w / self.deg_tgt[t] as f64,
            EdgeScale::Raw => w,
        }
    }
}

#[derive(Debug, Clone, Default)]
pub(crate) struct ConvTrace {
    agg: Vec<f64>,
    pre: Vec<f64>,
    /// Winning edge per `(target, channel)` for max aggregation.
    argmax: Vec<usize>,
}

struct ConvSpec {
    conv: Conv,
    max: bool,
    scale: EdgeScale,
    d: usize,
}

fn conv_spec(config: &SatGnnConfig, conv: Conv) -> ConvSpec {
    let (max, scale) = match (config.conv_kind, config.aggregation) {
        (ConvKind::Gcn, _) if config.gcn_normalize => (false, EdgeScale::Normalized),
        (ConvKind::Gcn, _) => (false, EdgeScale::Raw),
        (ConvKind::Sage, Aggregation::Sum) => (false, EdgeScale::Raw),
        (ConvKind::Sage, Aggregation::Mean) => (false, EdgeScale::Mean),
        (ConvKind::Sage, Aggregation::Max) => (true, EdgeScale::Raw),
    };
    ConvSpec {
        conv,
        max,
        scale,
        d: config.d,
    }
}

fn conv_forward(
    spec: &ConvSpec,
    p: &[f64],
    dir: &Direction,
    tgt_self: &[f64],
    src: &[f64],
) -> (Vec<f64>, ConvTrace) {
    let d = spec.d;
    let n = dir.n_tgt;
    let mut agg = vec![0.0; n * d];
    let mut argmax = Vec::new();
    if spec.max {
        agg.fill(f64::NEG_INFINITY);
        argmax = vec![NO_EDGE; n * d];
        for (e, &(t, s, w)) in dir.edges.iter().enumerate() {
            for k in 0..d {
                let m = w * src[s * d + k];
                if m > agg[t * d + k] {
                    agg[t * d + k] = m;
                    argmax[t * d + k] = e;
                }
            }
        }
        for (a, &e) in agg.iter_mut().zip(&argmax) {
            if e == NO_EDGE {
                *a = 0.0;
            }
        }
    } else {
        for &(t, s, w) in dir.edges {
            let c = dir.coef(spec.scale, t, s, w);
            for k in 0..d {
                agg[t * d + k] += c * src[s * d + k];
            }
        }
    }
    let mut pre = affine(&agg, n, p, spec.conv.neigh);
    if let Some(sw) = spec.conv.self_w {
        matmul_acc(tgt_self, n, d, &p[sw..sw + d * d], d, &mut pre);
    }
    let h = relu(&pre);
    (h, ConvTrace { agg, pre, argmax })
}

#[allow(clippy::too_many_arguments)]
/// Returns the gradient for the target's own state and accumulates the
/// gradient for the sources into `d_src`.
fn conv_backward(
    spec: &ConvSpec,
    p: &[f64],
    g: &mut [f64],
    dir: &Direction,
    tgt_self: &[f64],
    trace: &ConvTrace,
    dh: &[f64],
    d_src: &mut [f64],
) -> Vec<f64> {
    let d = spec.d;
    let n = dir.n_tgt;
    let dpre = relu_back(&trace.pre, dh);
    let lin = spec.conv.neigh;
    bias_back(&dpre, d, &mut g[lin.b..lin.b + d]);
    let dagg = matmul_back(
        &trace.agg,
        n,
        d,
        &p[lin.w..lin.w + d * d],
        d,
        &dpre,
        &mut g[lin.w..lin.w + d * d],
    );
    let d_self = match spec.conv.self_w {
        Some(sw) => matmul_back(
            tgt_self,
            n,
            d,
            &p[sw..sw + d * d],
            d,
            &dpre,
            &mut g[sw..sw + d * d],
        ),
        None => vec![0.0; n * d],
    };
    if spec.max {
        for (idx, &e) in trace.argmax.iter().enumerate() {
            if e != NO_EDGE {
                let (_, s, w) = dir.edges[e];
                d_src[s * d + idx % d] += w * dagg[idx];
            }
        }
    } else {
        for &(t, s, w) in dir.edges {
            let c = dir.coef(spec.scale, t, s, w);
            for k in 0..d {
                d_src[s * d + k] += c * dagg[t * d + k];
            }
        }
    }
    d_self
}

/// Intermediate values of one forward pass.
#[derive(Debug, Clone)]
pub(crate) struct Trace {
    pre_v0: Vec<f64>,
    pre_c0: Vec<f64>,
    /// Variable states `h_v^(0..=L)`.
    hv: Vec<Vec<f64>>,
    /// Constraint states `h_c^(0..=L)`.
    hc: Vec<Vec<f64>>,
    conv_c: Vec<ConvTrace>,
    conv_v: Vec<ConvTrace>,
    head_pre: [Vec<f64>; 2],
    head_h: [Vec<f64>; 2],
    /// One head logit per variable node.
    pub logits: Vec<f64>,
}

pub(crate) fn check_shapes(
    config: &SatGnnConfig,
    params: &ModelParams,
    g: &PreparedGraph,
) -> Result<(), GnnError> {
    if params.values.len() != params.layout.total {
        return Err(GnnError::Shape(
            "parameter vector does not match its layout".into(),
        ));
    }
    if params.layout != crate::params::Layout::new(config) {
        return Err(GnnError::Shape(
            "parameters were built for another configuration".into(),
        ));
    }
    if g.n_var > 0 && g.var_in != config.var_inputs() {
        return Err(GnnError::Shape(format!(
            "{:?} task expects {} variable features, graph has {}",
            config.task,
            config.var_inputs(),
            g.var_in
        )));
    }
    if g.n_con > 0 && g.con_in != onts_core::graph::CON_FEATURES {
        return Err(GnnError::Shape(format!(
            "expected {} constraint features, graph has {}",
            onts_core::graph::CON_FEATURES,
            g.con_in
        )));
    }
    if g.edges
        .iter()
        .any(|&(c, v, _)| c >= g.n_con || v >= g.n_var)
    {
        return Err(GnnError::Shape("edge index out of range".into()));
    }
    if config.task == Task::Feasibility && g.n_var == 0 {
        return Err(GnnError::Shape(
            "feasibility needs at least one variable node".into(),
        ));
    }
    Ok(())
}

fn directions(g: &PreparedGraph) -> (Direction<'_>, Direction<'_>) {
    (
        Direction {
            edges: &g.edges,
            n_tgt: g.n_con,
            deg_tgt: &g.con_deg,
            deg_src: &g.var_deg,
        },
        Direction {
            edges: &g.edges_to_var,
            n_tgt: g.n_var,
            deg_tgt: &g.var_deg,
            deg_src: &g.con_deg,
        },
    )
}

pub(crate) fn forward_trace(
    config: &SatGnnConfig,
    params: &ModelParams,
    g: &PreparedGraph,
) -> Trace {
    let p = &params.values;
    let layout = &params.layout;
    let (to_con, to_var) = directions(g);

    let pre_v0 = affine(&g.var_x, g.n_var, p, layout.enc_var);
    let pre_c0 = affine(&g.con_x, g.n_con, p, layout.enc_con);
    let mut hv = vec![relu(&pre_v0)];
    let mut hc = vec![relu(&pre_c0)];
    let mut conv_c = Vec::with_capacity(config.layers);
    let mut conv_v = Vec::with_capacity(config.layers);
    for l in 0..config.layers {
        let (v2c, c2v) = *layout.block(l);
        let (new_c, tc) = conv_forward(&conv_spec(config, v2c), p, &to_con, &hc[l], &hv[l]);
        let (new_v, tv) = conv_forward(&conv_spec(config, c2v), p, &to_var, &hv[l], &new_c);
        hc.push(new_c);
        hv.push(new_v);
        conv_c.push(tc);
        conv_v.push(tv);
    }
    let [h0, h1, h2] = layout.head;
    let pre0 = affine(&hv[config.layers], g.n_var, p, h0);
    let a0 = relu(&pre0);
    let pre1 = affine(&a0, g.n_var, p, h1);
    let a1 = relu(&pre1);
    let logits = affine(&a1, g.n_var, p, h2);
    Trace {
        pre_v0,
        pre_c0,
        hv,
        hc,
        conv_c,
        conv_v,
        head_pre: [pre0, pre1],
        head_h: [a0, a1],
        logits,
    }
}

/// Accumulates the parameter gradient for upstream `dlogits` into `grad`.
pub(crate) fn backward(
    config: &SatGnnConfig,
    params: &ModelParams,
    g: &PreparedGraph,
    trace: &Trace,
    dlogits: &[f64],
    grad: &mut [f64],
) {
    let p = &params.values;
    let layout = &params.layout;
    let d = config.d;
    let n = g.n_var;
    let (to_con, to_var) = directions(g);

    let [h0, h1, h2] = layout.head;
    bias_back(dlogits, 1, &mut grad[h2.b..h2.b + 1]);
    let da1 = matmul_back(
        &trace.head_h[1],
        n,
        d,
        &p[h2.w..h2.w + d],
        1,
        dlogits,
        &mut grad[h2.w..h2.w + d],
    );
    let dpre1 = relu_back(&trace.head_pre[1], &da1);
    bias_back(&dpre1, d, &mut grad[h1.b..h1.b + d]);
    let da0 = matmul_back(
        &trace.head_h[0],
        n,
        d,
        &p[h1.w..h1.w + d * d],
        d,
        &dpre1,
        &mut grad[h1.w..h1.w + d * d],
    );
    let dpre0 = relu_back(&trace.head_pre[0], &da0);
    bias_back(&dpre0, d, &mut grad[h0.b..h0.b + d]);
    let mut dhv = matmul_back(
        &trace.hv[config.layers],
        n,
        d,
        &p[h0.w..h0.w + d * d],
        d,
        &dpre0,
        &mut grad[h0.w..h0.w + d * d],
    );
    let mut dhc = vec![0.0; g.n_con * d];

    for l in (0..config.layers).rev() {
        let (v2c, c2v) = *layout.block(l);
        // variable update: h_v^(l+1) = conv(self h_v^(l), neighbors h_c^(l+1))
        let mut dhc_new = std::mem::take(&mut dhc);
        let dhv_prev = conv_backward(
            &conv_spec(config, c2v),
            p,
            grad,
            &to_var,
            &trace.hv[l],
            &trace.conv_v[l],
            &dhv,
            &mut dhc_new,
        );
        // constraint update: h_c^(l+1) = conv(self h_c^(l), neighbors h_v^(l))
        let mut dhv_l = dhv_prev;
        dhc = conv_backward(
            &conv_spec(config, v2c),
            p,
            grad,
            &to_con,
            &trace.hc[l],
            &trace.conv_c[l],
            &dhc_new,
            &mut dhv_l,
        );
        dhv = dhv_l;
    }

    let ev = layout.enc_var;
    let dpre_v = relu_back(&trace.pre_v0, &dhv);
    bias_back(&dpre_v, d, &mut grad[ev.b..ev.b + d]);
    let fin = ev.fin;
    matmul_back(
        &g.var_x,
        n,
        fin,
        &p[ev.w..ev.w + fin * d],
        d,
        &dpre_v,
        &mut grad[ev.w..ev.w + fin * d],
    );
    let ec = layout.enc_con;
    let dpre_c = relu_back(&trace.pre_c0, &dhc);
    bias_back(&dpre_c, d, &mut grad[ec.b..ec.b + d]);
    let fin = ec.fin;
    matmul_back(
        &g.con_x,
        g.n_con,
        fin,
        &p[ec.w..ec.w + fin * d],
        d,
        &dpre_c,
        &mut grad[ec.w..ec.w + fin * d],
    );
}

/// Bias task: one probability per binary variable node, in node order.
/// Feasibility task: a single probability, the sigmoid of the mean logit.
/// Probabilities are clamped to `[1e-12, 1 - 1e-12]`.
pub fn forward(
    params: &ModelParams,
    config: &SatGnnConfig,
    graph: &PreparedGraph,
) -> Result<Vec<f64>, GnnError> {
    check_shapes(config, params, graph)?;
    let trace = forward_trace(config, params, graph);
    let prob = |x: f64| sigmoid(x).clamp(PROB_CLAMP, 1.0 - PROB_CLAMP);
    Ok(match config.task {
        Task::Bias => graph
            .binary
            .iter()
            .map(|&v| prob(trace.logits[v]))
            .collect(),
        Task::Feasibility => {
            let mean = trace.logits.iter().sum::<f64>() / graph.n_var as f64;
            vec![prob(mean)]
        }
    })
}
