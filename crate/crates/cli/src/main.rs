use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use quatcs::embedding::build_embedding;
use quatcs::harness::{
    emit_plot, run_c0_experiment, run_ratio_test, run_sweep, C0Scatter, ExperimentConfig, PhaseDiagram, PlotData,
    SRule,
};
use quatcs::qlinalg::{read_json, write_json};
use quatcs::random::{
    sample_gaussian_matrix_mode, sample_sparse_signal_mode, sample_sphere, trial_stream_id, StreamKind,
};
use quatcs::rip::{error_constants, exact_delta, sampled_delta_lower_bound_mode};
use quatcs::{solve, Error, QMatrix, QVector, RecoveryProblem, Result, RngStream, ScalarMode, SolverParams};

#[derive(Parser)]
#[command(name = "quatcs", version, about = "Sparse recovery of quaternion signals")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Phase-transition sweep over (m, s)
    Sweep(SweepArgs),
    /// Solve one recovery problem
    Recover(RecoverArgs),
    /// Restricted isometry constants of a matrix
    Rip(RipArgs),
    /// Distribution of ‖Φx‖²/‖x‖² against its Gamma law
    Ratio(RatioArgs),
    /// Lower bounds on the constant C0 from dense signals
    C0(CommonArgs),
    /// Render a sweep summary or C0 scatter as SVG
    Plot(PlotArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Quaternion,
    Real,
}

impl From<ModeArg> for ScalarMode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::Quaternion => ScalarMode::Quaternion,
            ModeArg::Real => ScalarMode::Real,
        }
    }
}

#[derive(Args, Clone)]
struct CommonArgs {
    /// JSON experiment configuration; flags override its fields
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    n: Option<usize>,
    /// Measurement counts, comma separated
    #[arg(long, value_delimiter = ',')]
    m: Option<Vec<usize>>,
    /// Sparsity levels, comma separated
    #[arg(long, value_delimiter = ',')]
    s: Option<Vec<usize>>,
    #[arg(long)]
    trials: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    eta: Option<f64>,
    #[arg(long, value_enum)]
    mode: Option<ModeArg>,
    #[arg(long)]
    out: Option<PathBuf>,
}

impl CommonArgs {
    fn resolve(&self, base: ExperimentConfig) -> Result<ExperimentConfig> {
        let mut cfg = match &self.config {
            Some(path) => ExperimentConfig::from_json_file(path)?,
            None => base,
        };
        if let Some(n) = self.n {
            cfg.n = n;
        }
        if let Some(m) = &self.m {
            cfg.m_values = m.clone();
        }
        if let Some(s) = &self.s {
            cfg.s_rule = SRule::List(s.clone());
        }
        if let Some(t) = self.trials {
            cfg.trials = t;
        }
        if let Some(seed) = self.seed {
            cfg.base_seed = seed;
        }
        if let Some(eta) = self.eta {
            cfg.eta = eta;
        }
        if let Some(mode) = self.mode {
            cfg.scalar_mode = mode.into();
        }
        if let Some(out) = &self.out {
            cfg.output = out.clone();
        }
        Ok(cfg)
    }

    fn first_m(cfg: &ExperimentConfig) -> Result<usize> {
        cfg.m_values.first().copied().ok_or_else(|| Error::InvalidConfig("m_values is empty".into()))
    }

    fn first_s(cfg: &ExperimentConfig, m: usize) -> Result<usize> {
        match &cfg.s_rule {
            SRule::List(v) => v.first().copied(),
            SRule::UpToHalfM => (m >= 2).then_some(1),
        }
        .ok_or_else(|| Error::InvalidConfig("no sparsity level configured".into()))
    }
}

#[derive(Args)]
struct SweepArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Start from the complete grid (m = 2..64, all s ≤ m/2, 1000 trials); long running
    #[arg(long)]
    full: bool,
    /// Also render the phase diagram to <out>/phase.svg
    #[arg(long)]
    plot: bool,
}

#[derive(Args)]
struct RecoverArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Measurement matrix (JSON); a random instance is generated when absent
    #[arg(long, requires = "y")]
    phi: Option<PathBuf>,
    /// Measurements (JSON)
    #[arg(long, requires = "phi")]
    y: Option<PathBuf>,
    /// Ground truth (JSON) for error reporting
    #[arg(long)]
    x_true: Option<PathBuf>,
    /// Write the SOCP form of the problem as CSV files into this directory
    #[arg(long)]
    export_socp: Option<PathBuf>,
    /// Write the per-iteration residual trace as CSV
    #[arg(long)]
    trace: Option<PathBuf>,
    /// Solver parameters (JSON)
    #[arg(long)]
    solver: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum RipMethodArg {
    Exact,
    Sampled,
}

#[derive(Args)]
struct RipArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Matrix (JSON); a random m × n Gaussian matrix is generated when absent
    #[arg(long)]
    phi: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "exact")]
    method: RipMethodArg,
    /// Test vectors for the sampled lower bound
    #[arg(long, default_value_t = 100_000)]
    samples: usize,
    /// Compute δ_2s and, if it is below √2 − 1, print the recovery guarantee for s
    #[arg(long)]
    certificate: bool,
}

#[derive(Args)]
struct RatioArgs {
    #[command(flatten)]
    common: CommonArgs,
    #[arg(long, default_value_t = 20_000)]
    samples: usize,
}

#[derive(Args)]
struct PlotArgs {
    /// summary.json from `sweep` or c0.json from `c0`
    #[arg(long)]
    input: PathBuf,
    /// Output SVG path
    #[arg(long)]
    out: PathBuf,
}

fn print_json(v: &Value) {
    let text = serde_json::to_string_pretty(v).unwrap_or_else(|_| v.to_string());
    // a closed pipe (e.g. `| head`) is not an error worth reporting
    let _ = writeln!(std::io::stdout().lock(), "{text}");
}

fn generated_instance(cfg: &ExperimentConfig) -> Result<(QMatrix, QVector, QVector)> {
    let m = CommonArgs::first_m(cfg)?;
    let s = CommonArgs::first_s(cfg, m)?;
    let mut rng = RngStream::new(cfg.base_seed, trial_stream_id(StreamKind::Sweep, m, s, 0));
    let phi = sample_gaussian_matrix_mode(&mut rng, m, cfg.n, 1.0 / m as f64, cfg.scalar_mode)?;
    let (x, _) = sample_sparse_signal_mode(&mut rng, cfg.n, s, cfg.scalar_mode)?;
    let noise = sample_sphere(&mut rng, m, cfg.eta, cfg.scalar_mode)?;
    let y = phi.matvec(&x)?.try_add(&noise)?;
    Ok((phi, y, x))
}

fn cmd_sweep(args: SweepArgs) -> Result<Value> {
    let base = if args.full { ExperimentConfig::full() } else { ExperimentConfig::default() };
    let cfg = args.common.resolve(base)?;
    let diagram = run_sweep(&cfg)?;
    if args.plot {
        emit_plot(PlotData::Diagram(&diagram), &cfg.output.join("phase.svg"))?;
    }
    Ok(json!({
        "output": cfg.output,
        "cells": diagram.cells,
    }))
}

fn cmd_recover(args: RecoverArgs) -> Result<Value> {
    let cfg = args.common.resolve(ExperimentConfig { n: 16, m_values: vec![8], ..Default::default() })?;
    let (phi, y, x_true) = match (&args.phi, &args.y) {
        (Some(p), Some(y)) => {
            let x_true = args.x_true.as_deref().map(read_json::<QVector>).transpose()?;
            (read_json::<QMatrix>(p)?, read_json::<QVector>(y)?, x_true)
        }
        _ => {
            let (phi, y, x) = generated_instance(&cfg)?;
            (phi, y, Some(x))
        }
    };
    let mut params: SolverParams = match &args.solver {
        Some(p) => serde_json::from_str(&std::fs::read_to_string(p)?)?,
        None => cfg.solver.clone(),
    };
    params.trace |= args.trace.is_some();
    let problem = RecoveryProblem::new(phi, y, cfg.eta)?;
    if let Some(dir) = &args.export_socp {
        std::fs::create_dir_all(dir)?;
        build_embedding(&problem.phi, &problem.y)?.socp_data().write_csv(dir)?;
    }
    let result = solve(&problem, &params)?;
    if let Some(path) = &args.trace {
        std::fs::write(path, result.trace_csv())?;
    }
    if let Some(out) = &args.common.out {
        write_json(out, &result.x_hat)?;
    }
    let mut record = json!({
        "status": result.status,
        "iterations": result.iterations,
        "objective": result.objective,
        "primal_residual": result.primal_residual,
        "dual_residual": result.dual_residual,
        "polished": result.polished,
        "certificate_gap": result.certificate_gap,
        "misfit": problem.phi.matvec(&result.x_hat)?.try_sub(&problem.y)?.norm2(),
        "x_hat": result.x_hat,
    });
    if let Some(x) = x_true {
        let diff = result.x_hat.try_sub(&x)?;
        record["err_l1"] = json!(diff.norm1());
        record["err_l2"] = json!(diff.norm2());
    }
    Ok(record)
}

fn cmd_rip(args: RipArgs) -> Result<Value> {
    let cfg = args.common.resolve(ExperimentConfig { n: 8, m_values: vec![5], ..Default::default() })?;
    let m = CommonArgs::first_m(&cfg)?;
    let s = CommonArgs::first_s(&cfg, m).unwrap_or(1);
    let mut rng = RngStream::new(cfg.base_seed, trial_stream_id(StreamKind::Guarantee, m, s, 0));
    let phi = match &args.phi {
        Some(p) => read_json::<QMatrix>(p)?,
        None => sample_gaussian_matrix_mode(&mut rng, m, cfg.n, 1.0 / m as f64, cfg.scalar_mode)?,
    };
    let order = if args.certificate { 2 * s } else { s };
    let report = match args.method {
        RipMethodArg::Exact => exact_delta(&phi, order)?,
        RipMethodArg::Sampled => sampled_delta_lower_bound_mode(&phi, order, args.samples, &mut rng, cfg.scalar_mode)?,
    };
    let mut record = json!({ "report": report });
    if args.certificate {
        let constants = error_constants(report.delta)?;
        record["constants"] = json!(constants);
        record["guarantee"] = json!(constants.guarantee_text(s));
        if matches!(args.method, RipMethodArg::Sampled) {
            record["warning"] = json!("sampled delta is a lower bound; the guarantee is not certified");
        }
    }
    Ok(record)
}

fn cmd_ratio(args: RatioArgs) -> Result<Value> {
    let cfg = args.common.resolve(ExperimentConfig { m_values: vec![16], ..Default::default() })?;
    let m = CommonArgs::first_m(&cfg)?;
    let stats = run_ratio_test(m, cfg.n, args.samples, cfg.scalar_mode, cfg.base_seed)?;
    Ok(json!(stats))
}

fn cmd_c0(args: CommonArgs) -> Result<Value> {
    let cfg = args.resolve(ExperimentConfig::default())?;
    let scatter = run_c0_experiment(&cfg)?;
    let per_s: Vec<Value> = scatter.per_s_max().into_iter().map(|(s, r)| json!({ "s": s, "max_ratio": r })).collect();
    Ok(json!({
        "output": cfg.output,
        "points": scatter.points.len(),
        "skipped": scatter.skipped.len(),
        "per_s_max": per_s,
    }))
}

fn cmd_plot(args: PlotArgs) -> Result<Value> {
    let value: Value = serde_json::from_str(&std::fs::read_to_string(&args.input)?)?;
    if value.get("cells").is_some() {
        let d: PhaseDiagram = serde_json::from_value(value)?;
        emit_plot(PlotData::Diagram(&d), &args.out)?;
    } else if value.get("points").is_some() {
        let s: C0Scatter = serde_json::from_value(value)?;
        emit_plot(PlotData::Scatter(&s), &args.out)?;
    } else {
        return Err(Error::InvalidInput(format!("{} is neither a sweep summary nor a C0 scatter", args.input.display())));
    }
    Ok(json!({ "plot": args.out }))
}

fn run(cli: Cli) -> Result<Value> {
    match cli.command {
        Command::Sweep(a) => cmd_sweep(a),
        Command::Recover(a) => cmd_recover(a),
        Command::Rip(a) => cmd_rip(a),
        Command::Ratio(a) => cmd_ratio(a),
        Command::C0(a) => cmd_c0(a),
        Command::Plot(a) => cmd_plot(a),
    }
}

fn error_record(e: &Error) -> Value {
    json!({ "error": e.kind(), "message": e.to_string() })
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(v) => {
            print_json(&v);
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("{}", error_record(&e));
            ExitCode::FAILURE
        }
    }
}
