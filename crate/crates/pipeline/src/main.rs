use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use onts_core::instance_gen::random_instance_with;
use onts_core::io::{load_instance, read_text, solution_from_csv, write_text};
use onts_core::lp::write_lp;
use onts_core::{
    build_standard_form, check_feasibility, encode_bipartite, qos, CandidateSolution,
    GeneratorConfig, Instance,
};
use onts_heuristics::{confidence, predict, run_heuristic, HeuristicOptions, Mode};
use onts_pipeline::augment::{candidates_from_csv, candidates_to_csv, label_balance};
use onts_pipeline::dataset::{candidates_path, dataset_dir};
use onts_pipeline::{
    augment_candidates, bias_sample, feasibility_samples, gantt, generate_dataset, load_dataset,
    AugmentConfig, BiasLoss, DatasetConfig, Source,
};
use onts_solver::{solve_bb, PartialAssignment, SolutionPool, SolveOptions, Status, TrustRegion};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use satgnn::{
    accuracy, train, Aggregation, ConvKind, PreparedGraph, Sample, SatGnn, SatGnnConfig, Task,
};

const EXIT_INFEASIBLE: u8 = 1;
const EXIT_BAD_INPUT: u8 = 2;
const EXIT_LIMIT: u8 = 3;

/// ONTS scheduling toolkit: instances, exact solving, SatGNN training and
/// GNN-guided heuristics.
#[derive(Parser)]
#[command(name = "onts", version)]
struct Cli {
    /// Seed for every random choice.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Output file or directory (stdout when omitted, where that makes sense).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Suppress progress and summary messages.
    #[arg(long, global = true)]
    quiet: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a random instance as JSON.
    Gen {
        #[arg(long)]
        jobs: usize,
        #[arg(long)]
        horizon: usize,
        /// Initial battery reserve above the minimum SoC, in watt-steps.
        /// Negative starts fully charged.
        #[arg(long, default_value_t = 5.0, allow_hyphen_values = true)]
        reserve: f64,
    },
    /// Solve an instance exactly and write the solution pool.
    Solve {
        instance: PathBuf,
        #[command(flatten)]
        limits: Limits,
        /// Partial assignment (`index,value` CSV) to fix.
        #[arg(long)]
        fix: Option<PathBuf>,
        /// Trust-region centre (`index,value` CSV).
        #[arg(long, requires = "delta")]
        trust: Option<PathBuf>,
        #[arg(long)]
        delta: Option<usize>,
        /// Branching hint (`index,value` CSV).
        #[arg(long)]
        warm: Option<PathBuf>,
    },
    /// Check a solution (`j,t,x,phi` CSV or pool CSV) against an instance.
    Check {
        instance: PathBuf,
        solution: PathBuf,
    },
    /// Write the standard form in LP format.
    ExportLp { instance: PathBuf },
    /// Write the bipartite graph as JSON.
    Encode {
        instance: PathBuf,
        /// Candidate solution for the feasibility feature column.
        #[arg(long)]
        candidate: Option<PathBuf>,
    },
    /// Generate a solved dataset under `<out>/<seed>/`.
    Dataset {
        #[arg(long)]
        jobs: usize,
        #[arg(long)]
        horizon: usize,
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = onts_pipeline::dataset::DEFAULT_POOL_SIZE)]
        pool: usize,
        #[arg(long, default_value_t = onts_pipeline::dataset::DEFAULT_TIME_LIMIT_SECS)]
        time_limit: f64,
    },
    /// Add labeled candidates (`candidates_<k>.csv`) to a dataset directory.
    Augment {
        dir: PathBuf,
        #[arg(long)]
        random: usize,
        #[arg(long)]
        neighbor: usize,
        /// Largest number of flips for neighbours (default 5% of 2JT, at least 1).
        #[arg(long)]
        eta: Option<usize>,
    },
    /// Train a SatGNN model on one or more dataset directories.
    Train(TrainArgs),
    /// Run a trained model on an instance.
    Predict {
        instance: PathBuf,
        model: PathBuf,
        /// Candidate solution (feasibility models).
        #[arg(long)]
        candidate: Option<PathBuf>,
    },
    /// Solve with a GNN-guided heuristic.
    Heur {
        instance: PathBuf,
        model: PathBuf,
        #[arg(long, value_enum)]
        mode: ModeArg,
        /// Partial solution size (default 20% of 2JT).
        #[arg(long)]
        n: Option<usize>,
        #[arg(long, default_value_t = onts_heuristics::DEFAULT_DELTA)]
        delta: usize,
        #[command(flatten)]
        limits: Limits,
    },
    /// Print a text Gantt chart of a solution.
    Gantt {
        instance: PathBuf,
        solution: PathBuf,
    },
}

#[derive(Args)]
struct Limits {
    /// Number of best solutions kept.
    #[arg(long, default_value_t = 1)]
    pool: usize,
    /// Wall-clock limit in seconds.
    #[arg(long)]
    time_limit: Option<f64>,
    #[arg(long)]
    node_limit: Option<u64>,
}

impl Limits {
    fn options(&self) -> Result<SolveOptions> {
        if self.pool == 0 {
            bail!("--pool must be at least 1");
        }
        let time_limit = match self.time_limit {
            Some(s) if !(s.is_finite() && s >= 0.0) => {
                bail!("--time-limit must be a nonnegative number")
            }
            Some(s) => Some(Duration::from_secs_f64(s)),
            None => None,
        };
        Ok(SolveOptions {
            time_limit,
            node_limit: self.node_limit,
            ..SolveOptions::with_pool(self.pool)
        })
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Warm,
    Fix,
    Trust,
}

#[derive(Clone, Copy, ValueEnum)]
enum TaskArg {
    Feasibility,
    Bias,
}

#[derive(Clone, Copy, ValueEnum)]
enum ConvArg {
    Gcn,
    Sage,
}

#[derive(Clone, Copy, ValueEnum)]
enum AggArg {
    Mean,
    Max,
    Sum,
}

#[derive(Clone, Copy, ValueEnum)]
enum LossArg {
    OptB,
    OptM,
}

#[derive(Args)]
struct TrainArgs {
    /// Dataset directories (as written by `dataset`).
    #[arg(required = true)]
    dirs: Vec<PathBuf>,
    #[arg(long, value_enum)]
    task: TaskArg,
    /// Bias-task target.
    #[arg(long, value_enum, default_value = "opt-m")]
    loss: LossArg,
    #[arg(long)]
    d: Option<usize>,
    #[arg(long)]
    layers: Option<usize>,
    #[arg(long, value_enum)]
    conv: Option<ConvArg>,
    #[arg(long, value_enum)]
    agg: Option<AggArg>,
    #[arg(long)]
    lr: Option<f64>,
    #[arg(long)]
    epochs: Option<usize>,
    #[arg(long)]
    batch: Option<usize>,
    /// Fraction of samples held out for validation.
    #[arg(long, default_value_t = 0.2)]
    val_fraction: f64,
    /// History CSV path (default: `<out>.history.csv`).
    #[arg(long)]
    history: Option<PathBuf>,
}

struct Ctx {
    seed: u64,
    out: Option<PathBuf>,
    quiet: bool,
}

impl Ctx {
    fn info(&self, msg: impl AsRef<str>) {
        if !self.quiet {
            eprintln!("{}", msg.as_ref());
        }
    }

    fn emit(&self, text: &str) -> Result<()> {
        match &self.out {
            Some(path) => write_text(path, text)?,
            None => print!("{text}"),
        }
        Ok(())
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let ctx = Ctx {
        seed: cli.seed,
        out: cli.out,
        quiet: cli.quiet,
    };
    match run(&ctx, cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {}", describe(&e));
            ExitCode::from(EXIT_BAD_INPUT)
        }
    }
}

/// The error chain joined by `: `, skipping causes that the previous
/// message already spells out.
fn describe(e: &anyhow::Error) -> String {
    let mut out = String::new();
    for cause in e.chain() {
        let msg = cause.to_string();
        if !out.ends_with(&msg) {
            if !out.is_empty() {
                out.push_str(": ");
            }
            out.push_str(&msg);
        }
    }
    out
}

fn run(ctx: &Ctx, command: Command) -> Result<ExitCode> {
    match command {
        Command::Gen {
            jobs,
            horizon,
            reserve,
        } => {
            let config = GeneratorConfig {
                reserve_watt_steps: (reserve >= 0.0).then_some(reserve),
                ..GeneratorConfig::default()
            };
            let inst = random_instance_with(jobs, horizon, ctx.seed, &config)?;
            ctx.emit(&(inst.to_json() + "\n"))?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Solve {
            instance,
            limits,
            fix,
            trust,
            delta,
            warm,
        } => {
            let inst = load_instance(&instance)?;
            let mut opts = limits.options()?;
            if let Some(p) = fix {
                opts.fixings = load_partial(&p)?;
            }
            if let (Some(p), Some(delta)) = (trust, delta) {
                opts.trust = Some(TrustRegion {
                    center: load_partial(&p)?,
                    delta,
                });
            }
            if let Some(p) = warm {
                opts.warm_hint = Some(load_partial(&p)?);
            }
            let start = Instant::now();
            let pool = solve_bb(&inst, &opts)?;
            report_pool(ctx, &pool, start.elapsed());
            ctx.emit(&pool.to_csv())?;
            Ok(pool_exit(&pool))
        }
        Command::Check { instance, solution } => {
            let inst = load_instance(&instance)?;
            let sol = load_solution(&inst, &solution)?;
            let report = check_feasibility(&inst, &sol)?;
            let mut text = String::new();
            if report.feasible() {
                text.push_str(&format!("feasible, qos = {}\n", qos(&inst, &sol.x)));
            } else {
                text.push_str(&format!(
                    "infeasible: {} violations\n",
                    report.violations.len()
                ));
                for v in &report.violations {
                    text.push_str(&format!("  {v}\n"));
                }
            }
            ctx.emit(&text)?;
            Ok(if report.feasible() {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(EXIT_INFEASIBLE)
            })
        }
        Command::ExportLp { instance } => {
            let inst = load_instance(&instance)?;
            ctx.emit(&write_lp(&build_standard_form(&inst)))?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Encode {
            instance,
            candidate,
        } => {
            let inst = load_instance(&instance)?;
            let cand = candidate.map(|p| load_solution(&inst, &p)).transpose()?;
            let graph = encode_bipartite(&build_standard_form(&inst), cand.as_ref())?;
            ctx.emit(&(graph.to_json() + "\n"))?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Dataset {
            jobs,
            horizon,
            n,
            pool,
            time_limit,
        } => {
            let root = ctx.out.clone().unwrap_or_else(|| PathBuf::from("dataset"));
            let cfg = DatasetConfig {
                pool_size: pool,
                time_limit_secs: time_limit,
                ..DatasetConfig::new(jobs, horizon, n, ctx.seed)
            };
            let manifest = generate_dataset(&cfg, &root)?;
            ctx.info(format!(
                "{} instances in {} ({} attempts, {} rejected)",
                manifest.accepted,
                dataset_dir(&root, ctx.seed).display(),
                manifest.attempts,
                manifest.rejected
            ));
            Ok(ExitCode::SUCCESS)
        }
        Command::Augment {
            dir,
            random,
            neighbor,
            eta,
        } => {
            let entries = load_dataset(&dir)?;
            let mut all = Vec::new();
            for e in &entries {
                let pool: Vec<Vec<u8>> = e.pool.solutions.iter().map(|s| s.solution.z()).collect();
                let cfg = AugmentConfig {
                    n_random: random,
                    n_neighbor: neighbor,
                    eta,
                    seed: ctx.seed.wrapping_add(e.index as u64),
                };
                let cands = augment_candidates(&e.instance, &pool, &cfg)?;
                write_text(candidates_path(&dir, e.index), &candidates_to_csv(&cands))?;
                all.extend(cands);
            }
            for source in [Source::Pool, Source::Random, Source::Neighbor] {
                let b = label_balance(&all, Some(source));
                ctx.info(format!(
                    "{source:>8}: {} feasible, {} infeasible",
                    b.feasible, b.infeasible
                ));
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Train(args) => train_command(ctx, args),
        Command::Predict {
            instance,
            model,
            candidate,
        } => {
            let inst = load_instance(&instance)?;
            let model = load_model(&model)?;
            match model.config.task {
                Task::Bias => {
                    if candidate.is_some() {
                        bail!("bias models take no candidate");
                    }
                    let probs = predict(&inst, &model)?;
                    let kappa = confidence(&probs)?;
                    let names = &build_standard_form(&inst).var_names;
                    let mut text = String::from("index,name,prob,confidence\n");
                    for (k, (p, c)) in probs.iter().zip(&kappa).enumerate() {
                        text.push_str(&format!("{k},{},{p},{c}\n", names[k]));
                    }
                    ctx.emit(&text)?;
                }
                Task::Feasibility => {
                    let Some(path) = candidate else {
                        bail!("feasibility models need --candidate");
                    };
                    let sol = load_solution(&inst, &path)?;
                    let graph = encode_bipartite(&build_standard_form(&inst), Some(&sol))?;
                    let p = model.predict_feasibility(&PreparedGraph::new(&graph))?;
                    ctx.emit(&format!("{p}\n"))?;
                }
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Heur {
            instance,
            model,
            mode,
            n,
            delta,
            limits,
        } => {
            let inst = load_instance(&instance)?;
            let model = load_model(&model)?;
            let opts = HeuristicOptions {
                mode: match mode {
                    ModeArg::Warm => Mode::Warm,
                    ModeArg::Fix => Mode::Fix,
                    ModeArg::Trust => Mode::Trust,
                },
                n,
                delta,
                solve: limits.options()?,
            };
            let start = Instant::now();
            let run = run_heuristic(&inst, &model, &opts)?;
            report_pool(ctx, &run.pool, start.elapsed());
            if run.restricted_infeasible {
                ctx.info(format!(
                    "no solution after {} fixings from the model (the instance itself may be feasible)",
                    run.partial.len()
                ));
            }
            ctx.emit(&run.pool.to_csv())?;
            Ok(pool_exit(&run.pool))
        }
        Command::Gantt { instance, solution } => {
            let inst = load_instance(&instance)?;
            let sol = load_solution(&inst, &solution)?;
            ctx.emit(&gantt::render(&inst, &sol))?;
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn pool_exit(pool: &SolutionPool) -> ExitCode {
    match pool.status {
        Status::Optimal => ExitCode::SUCCESS,
        Status::Infeasible => ExitCode::from(EXIT_INFEASIBLE),
        Status::Feasible | Status::Limit => ExitCode::from(EXIT_LIMIT),
    }
}

fn report_pool(ctx: &Ctx, pool: &SolutionPool, elapsed: Duration) {
    let best = pool
        .best_qos()
        .map_or_else(|| "none".to_string(), |q| q.to_string());
    ctx.info(format!(
        "{}: {} solutions, best qos {best}, {} nodes, {:.3} s",
        pool.status,
        pool.len(),
        pool.nodes_explored,
        elapsed.as_secs_f64()
    ));
    if let Some(d) = &pool.diagnostic {
        ctx.info(d);
    }
}

fn load_partial(path: &Path) -> Result<PartialAssignment> {
    let text = read_text(path)?;
    PartialAssignment::from_csv(&text).with_context(|| format!("reading {}", path.display()))
}

/// Accepts a `j,t,x,phi` solution CSV or a pool CSV (best entry).
fn load_solution(inst: &Instance, path: &Path) -> Result<CandidateSolution> {
    let text = read_text(path)?;
    let is_pool = text
        .lines()
        .map(str::trim)
        .find(|l| !l.is_empty() && !l.starts_with('#'))
        == Some("rank,qos,z");
    if is_pool {
        let pool = SolutionPool::from_csv(&text, inst)
            .with_context(|| format!("reading {}", path.display()))?;
        match pool.best() {
            Some(e) => Ok(e.solution.clone()),
            None => bail!("{} holds no solutions", path.display()),
        }
    } else {
        Ok(solution_from_csv(&text, inst.n_jobs(), inst.horizon())
            .with_context(|| format!("reading {}", path.display()))?)
    }
}

fn load_model(path: &Path) -> Result<SatGnn> {
    let text = read_text(path)?;
    SatGnn::from_json(&text).with_context(|| format!("reading model {}", path.display()))
}

fn train_command(ctx: &Ctx, args: TrainArgs) -> Result<ExitCode> {
    if !(0.0..1.0).contains(&args.val_fraction) {
        bail!("--val-fraction must lie in [0, 1)");
    }
    let mut config = match args.task {
        TaskArg::Feasibility => SatGnnConfig::feasibility(),
        TaskArg::Bias => SatGnnConfig::bias(),
    };
    config.seed = ctx.seed;
    if let Some(d) = args.d {
        config.d = d;
    }
    if let Some(l) = args.layers {
        config.layers = l;
    }
    if let Some(c) = args.conv {
        config.conv_kind = match c {
            ConvArg::Gcn => ConvKind::Gcn,
            ConvArg::Sage => ConvKind::Sage,
        };
    }
    if let Some(a) = args.agg {
        config.aggregation = match a {
            AggArg::Mean => Aggregation::Mean,
            AggArg::Max => Aggregation::Max,
            AggArg::Sum => Aggregation::Sum,
        };
    }
    if let Some(lr) = args.lr {
        config.learning_rate = lr;
    }
    if let Some(e) = args.epochs {
        config.max_epochs = e;
    }
    if let Some(b) = args.batch {
        config.batch_size = b;
    }
    let loss = match args.loss {
        LossArg::OptB => BiasLoss::Best,
        LossArg::OptM => BiasLoss::Pool,
    };

    let mut samples: Vec<Sample> = Vec::new();
    for dir in &args.dirs {
        for e in load_dataset(dir)? {
            match config.task {
                Task::Bias => samples.push(bias_sample(&e.instance, &e.pool, loss)?),
                Task::Feasibility => {
                    let path = candidates_path(dir, e.index);
                    let text = read_text(&path).with_context(|| "run `augment` first")?;
                    let cands = candidates_from_csv(&text, &e.instance)
                        .with_context(|| format!("reading {}", path.display()))?;
                    samples.extend(feasibility_samples(&e.instance, &cands)?);
                }
            }
        }
    }
    if samples.is_empty() {
        bail!("no training samples found");
    }
    samples.shuffle(&mut ChaCha8Rng::seed_from_u64(ctx.seed));
    let n_val = ((samples.len() as f64) * args.val_fraction).floor() as usize;
    let val = samples.split_off(samples.len() - n_val);
    ctx.info(format!(
        "{} training and {} validation samples",
        samples.len(),
        val.len()
    ));

    let (model, history) = train(&config, &samples, &val)?;
    let out = ctx
        .out
        .clone()
        .unwrap_or_else(|| PathBuf::from("model.json"));
    write_text(&out, &(model.to_json() + "\n"))?;
    let history_path = args
        .history
        .unwrap_or_else(|| PathBuf::from(format!("{}.history.csv", out.display())));
    write_text(&history_path, &history.to_csv())?;
    let last = history.epochs.last().expect("history has epoch 0");
    ctx.info(format!(
        "{} epochs, final train loss {:.6}, val loss {:.6}",
        last.epoch, last.train_loss, last.val_loss
    ));
    if config.task == Task::Feasibility {
        ctx.info(format!("train accuracy {:.3}", accuracy(&model, &samples)?));
        if !val.is_empty() {
            ctx.info(format!(
                "validation accuracy {:.3}",
                accuracy(&model, &val)?
            ));
        }
    }
    ctx.info(format!("model written to {}", out.display()));
    Ok(ExitCode::SUCCESS)
}
