//! Argument parsing and the six verbs of the `unreliable` binary.
//!
//! Exit codes: 0 on success, 1 for invalid input, 2 when `verify` finds a
//! failing property, 3 when a numerical method does not converge.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use unreliable_core::asymptotics::{self, AlphaLimits, EtaOptions, Mm1Comparison, TailAsymptotic, TwoTermTail};
use unreliable_core::qbd::{self, RateMatrixSolution, StationaryTable};
use unreliable_core::simulate::{self, Excursion, Regime};
use unreliable_core::spectral::{self, SpectralSolution, Stability};
use unreliable_core::twist::{self, TwistSummary};
use unreliable_core::{Error as CoreError, Model, ModelParams, ServerStatus, State};

use crate::config::ParamsFile;
use crate::output::{fmt_f64, output_path, write_report, CsvOutput, Metadata};
use crate::replicate::{pool_tables, replicate};
use crate::verify::{self, VerifyOptions};

pub const EXIT_VALIDATION: i32 = 1;
pub const EXIT_VERIFY: i32 = 2;
pub const EXIT_CONVERGENCE: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "unreliable", version, about = "Tail asymptotics and simulation of queues with an unreliable server")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Decay rates, harmonic twist, tail constants and stability as JSON.
    Analyze(AnalyzeArgs),
    /// Simulate the embedded chain; writes the path and occupation table.
    Simulate(SimulateArgs),
    /// Extract climbs to a high level and classify them by server status.
    Ldpath(LdpathArgs),
    /// Fit a geometric tail to a stationary table.
    Tailfit(TailfitArgs),
    /// Compare the decay rate with the M/M/1 queue of the same capacity.
    #[command(name = "compare-mm1")]
    CompareMm1(CompareArgs),
    /// Run the invariant suite on random parameter grids.
    Verify(VerifyArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModelArg {
    Model1,
    Model2,
    Rsrd,
}

impl From<ModelArg> for Model {
    fn from(m: ModelArg) -> Model {
        match m {
            ModelArg::Model1 => Model::Model1,
            ModelArg::Model2 => Model::Model2,
            ModelArg::Rsrd => Model::RsRd,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum StatusArg {
    Up,
    Down,
}

impl From<StatusArg> for ServerStatus {
    fn from(s: StatusArg) -> ServerStatus {
        match s {
            StatusArg::Up => ServerStatus::Up,
            StatusArg::Down => ServerStatus::Down,
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct ParamArgs {
    /// JSON file with lambda, mu, alpha, beta, p, C and model.
    #[arg(long, conflicts_with_all = ["lambda", "mu", "alpha", "beta", "p", "c", "model"])]
    pub params: Option<PathBuf>,
    #[arg(long)]
    pub lambda: Option<f64>,
    #[arg(long)]
    pub mu: Option<f64>,
    #[arg(long)]
    pub alpha: Option<f64>,
    #[arg(long)]
    pub beta: Option<f64>,
    /// Departure probability after service at the unreliable server.
    #[arg(long)]
    pub p: Option<f64>,
    /// Uniformization constant; defaults to the smallest admissible value.
    #[arg(long = "C", visible_alias = "c")]
    pub c: Option<f64>,
    #[arg(long, value_enum)]
    pub model: Option<ModelArg>,
}

impl ParamArgs {
    pub fn resolve(&self) -> anyhow::Result<(ModelParams, Model, ParamsFile)> {
        let file = match &self.params {
            Some(path) => ParamsFile::load(path).map_err(|e| Invalid(format!("{e:#}")))?,
            None => {
                let need = |v: Option<f64>, name: &str| {
                    v.ok_or_else(|| Invalid(format!("missing --{name} (or pass --params FILE)")))
                };
                ParamsFile {
                    lambda: need(self.lambda, "lambda")?,
                    mu: need(self.mu, "mu")?,
                    alpha: need(self.alpha, "alpha")?,
                    beta: need(self.beta, "beta")?,
                    p: self.p.unwrap_or(1.0),
                    c: self.c,
                    model: self.model.map_or(Model::Model1, Model::from),
                }
            }
        };
        let (params, model) = file.resolve()?;
        Ok((params, model, ParamsFile::from_params(&params, model)))
    }
}

#[derive(Debug, Clone, Args)]
pub struct OutArgs {
    /// Directory for output files.
    #[arg(long, default_value = "out")]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Args)]
pub struct StartArgs {
    #[arg(long, default_value_t = 0)]
    pub start_x: i64,
    #[arg(long, default_value_t = 0)]
    pub start_y: i64,
    #[arg(long, value_enum, default_value = "up")]
    pub start_status: StatusArg,
}

impl StartArgs {
    fn state(&self, model: Model) -> State {
        let y = if model == Model::Model1 { 0 } else { self.start_y };
        State::new(model, self.start_x, y, self.start_status.into())
    }
}

#[derive(Debug, Clone, Args)]
pub struct AnalyzeArgs {
    #[command(flatten)]
    pub params: ParamArgs,
    #[command(flatten)]
    pub out: OutArgs,
    /// Include the alpha -> 0 limits of the main quantities.
    #[arg(long)]
    pub limits: bool,
    /// Seed of the Monte Carlo tail constant (Model 2 with p = 1).
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// Twisted paths for the Monte Carlo tail constant.
    #[arg(long, default_value_t = 20_000)]
    pub paths: usize,
    /// Level counted as escape by the Monte Carlo tail constant.
    #[arg(long, default_value_t = 100)]
    pub escape_level: i64,
}

#[derive(Debug, Clone, Args)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub params: ParamArgs,
    #[command(flatten)]
    pub out: OutArgs,
    #[command(flatten)]
    pub start: StartArgs,
    #[arg(long, default_value_t = 100_000)]
    pub steps: u64,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// Steps discarded before counting occupation; defaults to 1% of the run.
    #[arg(long)]
    pub burn_in: Option<u64>,
    /// Keep every n-th state in the trajectory file; defaults to
    /// ceil(steps / 1e6).
    #[arg(long)]
    pub thin: Option<u64>,
    /// Independent runs; replication i uses stream i of the seed.
    #[arg(long, default_value_t = 1)]
    pub replications: usize,
    /// Worker threads; defaults to the available parallelism.
    #[arg(long)]
    pub threads: Option<usize>,
}

#[derive(Debug, Clone, Args)]
pub struct LdpathArgs {
    #[command(flatten)]
    pub params: ParamArgs,
    #[command(flatten)]
    pub out: OutArgs,
    #[command(flatten)]
    pub start: StartArgs,
    #[arg(long, default_value_t = 70_000)]
    pub steps: u64,
    /// Level K that ends an excursion.
    #[arg(long, default_value_t = 30)]
    pub level: i64,
    /// Level an excursion starts from.
    #[arg(long, default_value_t = simulate::DEFAULT_BASE_LEVEL)]
    pub base_level: i64,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum TableSource {
    /// Matrix-geometric solution (Model 1 only).
    Exact,
    /// Truncated global balance solve.
    Truncated,
    /// Occupation frequencies of a simulated run.
    Simulated,
}

#[derive(Debug, Clone, Args)]
pub struct TailfitArgs {
    #[command(flatten)]
    pub params: ParamArgs,
    #[command(flatten)]
    pub out: OutArgs,
    #[arg(long, default_value_t = 10)]
    pub k_min: i64,
    #[arg(long, default_value_t = 60)]
    pub k_max: i64,
    /// Second queue length at which to fit.
    #[arg(long, default_value_t = 0)]
    pub y: i64,
    #[arg(long, value_enum, default_value = "up")]
    pub status: StatusArg,
    /// Defaults to `exact` for Model 1 and `truncated` otherwise.
    #[arg(long, value_enum)]
    pub source: Option<TableSource>,
    /// Truncation box for the `truncated` source.
    #[arg(long, default_value_t = 60)]
    pub x_max: u32,
    #[arg(long, default_value_t = 60)]
    pub y_max: u32,
    #[arg(long, default_value_t = 10_000_000)]
    pub steps: u64,
    #[arg(long, default_value_t = 100_000)]
    pub burn_in: u64,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
}

#[derive(Debug, Clone, Args)]
pub struct CompareArgs {
    #[command(flatten)]
    pub params: ParamArgs,
    #[command(flatten)]
    pub out: OutArgs,
    /// Levels listed side by side with the M/M/1 law (Model 1).
    #[arg(long, default_value_t = 20)]
    pub levels: u32,
}

#[derive(Debug, Clone, Args)]
pub struct VerifyArgs {
    #[command(flatten)]
    pub out: OutArgs,
    /// Points per random parameter grid.
    #[arg(long, default_value_t = 200)]
    pub grid: usize,
    #[arg(long, default_value_t = 7)]
    pub seed: u64,
}

/// Input rejected before any computation.
#[derive(Debug)]
struct Invalid(String);

impl std::fmt::Display for Invalid {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for Invalid {}

/// Exit code for an error returned by a verb.
pub fn exit_code(err: &anyhow::Error) -> i32 {
    for cause in err.chain() {
        if let Some(e) = cause.downcast_ref::<CoreError>() {
            return match e {
                CoreError::NoConvergence { .. }
                | CoreError::NotConverged(_)
                | CoreError::Disagreement { .. }
                | CoreError::Singular(_) => EXIT_CONVERGENCE,
                _ => EXIT_VALIDATION,
            };
        }
    }
    EXIT_VALIDATION
}

/// Parses `args` (including the program name), runs the verb and returns
/// the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString>,
{
    let argv: Vec<String> = args.into_iter().map(|a| a.into().to_string_lossy().into_owned()).collect();
    let cli = match Cli::try_parse_from(&argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_VALIDATION } else { 0 };
        }
    };
    match dispatch(&cli.command, &argv) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            exit_code(&e)
        }
    }
}

fn dispatch(command: &Command, argv: &[String]) -> anyhow::Result<i32> {
    match command {
        Command::Analyze(a) => analyze(a, argv),
        Command::Simulate(a) => simulate_cmd(a, argv),
        Command::Ldpath(a) => ldpath(a, argv),
        Command::Tailfit(a) => tailfit(a, argv),
        Command::CompareMm1(a) => compare_mm1(a, argv),
        Command::Verify(a) => verify_cmd(a, argv),
    }
}

fn has_y(model: Model) -> bool {
    model.has_second_queue()
}

#[derive(Serialize)]
struct RateMatrixReport {
    closed_form: [[f64; 2]; 2],
    iterated: RateMatrixSolution,
    max_entry_gap: f64,
}

#[derive(Serialize)]
struct AnalyzeReport {
    model: Model,
    #[serde(skip_serializing_if = "Option::is_none")]
    gamma_1: Option<f64>,
    gamma_p: f64,
    spectral: SpectralSolution,
    stability: Stability,
    #[serde(skip_serializing_if = "Option::is_none")]
    neuts_stable: Option<bool>,
    rate_matrix: Option<RateMatrixReport>,
    twist: Option<TwistSummary>,
    tail: Option<TailAsymptotic>,
    two_term: Option<TwoTermTail>,
    #[serde(skip_serializing_if = "Option::is_none")]
    alpha_limits: Option<AlphaLimits>,
    notes: Vec<String>,
}

fn analyze(args: &AnalyzeArgs, argv: &[String]) -> anyhow::Result<i32> {
    let (params, model, file) = args.params.resolve()?;
    let spectral = spectral::characteristic_roots(&params);
    let stability = spectral::stability(&params, model);
    let mut notes = Vec::new();
    let mut report = AnalyzeReport {
        model,
        gamma_1: (params.p == 1.0).then_some(spectral.gamma_p),
        gamma_p: spectral.gamma_p,
        spectral,
        stability,
        neuts_stable: None,
        rate_matrix: None,
        twist: None,
        tail: None,
        two_term: None,
        alpha_limits: None,
        notes: Vec::new(),
    };
    if model == Model::Model1 {
        report.neuts_stable = Some(qbd::neuts_stability(&qbd::qbd_blocks(&params)));
    }
    if stability.stable {
        if model == Model::Model1 {
            let closed = qbd::rate_matrix_closed_form(&params)?;
            let iterated = qbd::rate_matrix_iterate(&qbd::qbd_blocks(&params), 1e-15)?;
            report.rate_matrix = Some(RateMatrixReport {
                closed_form: closed.0,
                max_entry_gap: closed.max_abs_diff(&iterated.r),
                iterated,
            });
            report.two_term = Some(asymptotics::two_term_tail(&params, asymptotics::TWO_TERM_WINDOW)?);
        }
        if model == Model::RsRd {
            notes.push("harmonic twist and tail constants are not defined for the rerouting network".into());
        } else {
            report.twist = Some(twist::twist_summary(&params, model)?);
            let options = EtaOptions {
                paths: args.paths,
                escape_level: args.escape_level,
                seed: args.seed,
                ..EtaOptions::default()
            };
            report.tail = Some(asymptotics::prefactors_with(&params, model, &options)?);
        }
    } else {
        notes.push(format!(
            "unstable: lambda = {} is not below the effective service rate {}",
            params.lambda,
            stability.effective_rate * params.p
        ));
    }
    if args.limits {
        match asymptotics::alpha_limits(params.lambda, params.mu, params.beta, params.p, model) {
            Ok(l) => report.alpha_limits = Some(l),
            Err(e) => notes.push(format!("alpha limits skipped: {e}")),
        }
    }
    report.notes = notes;
    let meta = Metadata::new("analyze", argv, Some(file), Some(args.seed));
    let path = output_path(&args.out.out, "analyze.json")?;
    write_report(&path, &meta, &report)?;
    println!("gamma_p = {}  stable = {}  -> {}", fmt_f64(spectral.gamma_p), stability.stable, path.display());
    Ok(0)
}

#[derive(Serialize)]
struct ReplicationSummary {
    index: u64,
    up_marginal: f64,
    max_level: i64,
    transient_suspected: bool,
}

#[derive(Serialize)]
struct SimulateReport {
    steps: u64,
    burn_in: u64,
    thin: u64,
    replications: Vec<ReplicationSummary>,
    up_marginal: f64,
    up_marginal_std_error: Option<f64>,
    up_marginal_target: f64,
    total_variation_vs_exact: Option<f64>,
    transient_suspected: bool,
}

/// Levels needed for the matrix-geometric tail to fall below `1e-14`.
fn exact_levels(params: &ModelParams, at_least: i64) -> u32 {
    let rho = spectral::characteristic_roots(params).gamma_p;
    let k = (1e-14_f64.ln() / rho.ln()).ceil();
    (k.clamp(50.0, 4000.0) as u32).max(at_least.clamp(0, 100_000) as u32)
}

fn total_variation(pooled: &BTreeMap<(i64, i64, ServerStatus), f64>, exact: &StationaryTable) -> f64 {
    let mut sum = 0.0;
    for (s, v) in exact.iter() {
        sum += (v - pooled.get(&(s.x, s.y, s.status)).copied().unwrap_or(0.0)).abs();
    }
    for (&(x, y, s), v) in pooled {
        if exact.index_of(&State::new(exact.model, x, y, s)).is_none() {
            sum += v;
        }
    }
    0.5 * sum
}

fn simulate_cmd(args: &SimulateArgs, argv: &[String]) -> anyhow::Result<i32> {
    let (params, model, file) = args.params.resolve()?;
    if args.steps == 0 {
        bail!(Invalid("--steps must be at least 1".into()));
    }
    if args.replications == 0 {
        bail!(Invalid("--replications must be at least 1".into()));
    }
    let burn_in = args.burn_in.unwrap_or(args.steps / 100);
    if burn_in >= args.steps {
        bail!(Invalid(format!("--burn-in {burn_in} must be below --steps {}", args.steps)));
    }
    let thin = args.thin.unwrap_or(args.steps.div_ceil(1_000_000)).max(1);
    let start = args.start.state(model);
    let meta = Metadata::new("simulate", argv, Some(file), Some(args.seed));

    // replication 0 replays the same stream as the stored trajectory
    let traj = simulate::simulate_thinned(&params, model, args.steps, args.seed, start, thin)?;
    let path = output_path(&args.out.out, "trajectory.csv")?;
    let mut cols = vec!["step", "x"];
    if has_y(model) {
        cols.push("y");
    }
    cols.push("status");
    let mut csv = CsvOutput::create(&path, &meta, &[("thin", thin.to_string())], &cols)?;
    for (step, s) in &traj.steps {
        let mut row = vec![step.to_string(), s.x.to_string()];
        if has_y(model) {
            row.push(s.y.to_string());
        }
        row.push(s.status.code().to_string());
        csv.row(&row)?;
    }
    csv.finish()?;
    drop(traj);

    let threads = args
        .threads
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()));
    let runs = replicate(args.seed, args.replications, threads, |_, mut rng| {
        simulate::simulate_occupation_with(&params, model, args.steps, burn_in, start, &mut rng)
    })?;
    let tables: Vec<StationaryTable> = runs.iter().map(|r| r.table.clone()).collect();
    let pooled = pool_tables(&tables);

    let path = output_path(&args.out.out, "empirical.csv")?;
    let mut cols = vec!["x"];
    if has_y(model) {
        cols.push("y");
    }
    cols.extend(["status", "probability"]);
    let extra = [
        ("burn_in", burn_in.to_string()),
        ("replications", args.replications.to_string()),
    ];
    let mut csv = CsvOutput::create(&path, &meta, &extra, &cols)?;
    for (&(x, y, s), v) in &pooled {
        let mut row = vec![x.to_string()];
        if has_y(model) {
            row.push(y.to_string());
        }
        row.push(s.code().to_string());
        row.push(fmt_f64(*v));
        csv.row(&row)?;
    }
    csv.finish()?;

    let ups: Vec<f64> = runs.iter().map(|r| r.table.up_marginal()).collect();
    let n = ups.len() as f64;
    let up_mean = ups.iter().sum::<f64>() / n;
    let std_error = (ups.len() > 1).then(|| {
        let var = ups.iter().map(|u| (u - up_mean).powi(2)).sum::<f64>() / (n - 1.0);
        (var / n).sqrt()
    });
    let max_level = runs.iter().map(|r| r.max_level).max().unwrap_or(0);
    let total_variation_vs_exact = if model == Model::Model1 && spectral::stability(&params, model).stable {
        let exact = qbd::exact_stationary_model1(&params, exact_levels(&params, max_level))?;
        Some(total_variation(&pooled, &exact))
    } else {
        None
    };
    let report = SimulateReport {
        steps: args.steps,
        burn_in,
        thin,
        replications: runs
            .iter()
            .enumerate()
            .map(|(i, r)| ReplicationSummary {
                index: i as u64,
                up_marginal: r.table.up_marginal(),
                max_level: r.max_level,
                transient_suspected: r.transient_suspected,
            })
            .collect(),
        up_marginal: up_mean,
        up_marginal_std_error: std_error,
        up_marginal_target: params.beta / (params.alpha + params.beta),
        total_variation_vs_exact,
        transient_suspected: runs.iter().any(|r| r.transient_suspected),
    };
    let path = output_path(&args.out.out, "simulate.json")?;
    write_report(&path, &meta, &report)?;
    println!(
        "up marginal {} (target {}), max level {max_level}{}",
        fmt_f64(up_mean),
        fmt_f64(report.up_marginal_target),
        if report.transient_suspected { ", transient behaviour suspected" } else { "" }
    );
    Ok(0)
}

#[derive(Serialize)]
struct LdpathReport {
    steps: u64,
    level: i64,
    base_level: i64,
    excursion_count: usize,
    observed_regime: Option<Regime>,
    predicted_regime: Option<Regime>,
    down_fraction_histogram: [usize; 10],
    mean_slope_per_step: Option<f64>,
    drift_per_step: Option<f64>,
    drift_per_time: Option<f64>,
    notes: Vec<String>,
}

fn ldpath(args: &LdpathArgs, argv: &[String]) -> anyhow::Result<i32> {
    let (params, model, file) = args.params.resolve()?;
    if !(args.level > args.base_level && args.base_level >= 0) {
        bail!(Invalid(format!(
            "need --level > --base-level >= 0, got {} and {}",
            args.level, args.base_level
        )));
    }
    let traj = simulate::simulate(&params, model, args.steps, args.seed, args.start.state(model))?;
    let excursions = simulate::ld_excursions(&traj, args.level, args.base_level)?;
    let meta = Metadata::new("ldpath", argv, Some(file), Some(args.seed));

    let path = output_path(&args.out.out, "excursions.csv")?;
    let mut csv = CsvOutput::create(
        &path,
        &meta,
        &[("level", args.level.to_string()), ("base_level", args.base_level.to_string())],
        &["start", "end", "peak", "down_fraction", "slope"],
    )?;
    for e in &excursions {
        csv.row([
            e.start_step.to_string(),
            e.end_step.to_string(),
            e.peak.to_string(),
            fmt_f64(e.down_fraction),
            fmt_f64(e.slope_estimate),
        ])?;
    }
    csv.finish()?;

    let mut notes = Vec::new();
    let predicted = simulate::regime_prediction(&params)
        .map_err(|e| notes.push(e.to_string()))
        .ok();
    let drift = if model != Model::RsRd && spectral::stability(&params, model).stable {
        twist::horizontal_drift(&params, model)
            .map_err(|e| notes.push(format!("drift unavailable: {e}")))
            .ok()
            .map(|d| d.closed_form)
    } else {
        None
    };
    let observed = simulate::majority_regime(&excursions);
    let report = LdpathReport {
        steps: args.steps,
        level: args.level,
        base_level: args.base_level,
        excursion_count: excursions.len(),
        observed_regime: observed,
        predicted_regime: predicted,
        down_fraction_histogram: simulate::down_fraction_histogram(&excursions),
        mean_slope_per_step: mean_slope(&excursions),
        drift_per_step: drift,
        drift_per_time: drift.map(|d| d * params.c),
        notes,
    };
    let path = output_path(&args.out.out, "ldpath.json")?;
    write_report(&path, &meta, &report)?;
    println!(
        "regime verdict: {} ({} excursions; predicted {})",
        observed.map_or("none", Regime::name),
        excursions.len(),
        predicted.map_or("none", Regime::name)
    );
    Ok(0)
}

fn mean_slope(excursions: &[Excursion]) -> Option<f64> {
    (!excursions.is_empty()).then(|| excursions.iter().map(|e| e.slope_estimate).sum::<f64>() / excursions.len() as f64)
}

fn tailfit(args: &TailfitArgs, argv: &[String]) -> anyhow::Result<i32> {
    let (params, model, file) = args.params.resolve()?;
    if !(0 <= args.k_min && args.k_min < args.k_max) {
        bail!(Invalid(format!("need 0 <= --k-min < --k-max, got {} and {}", args.k_min, args.k_max)));
    }
    let status: ServerStatus = args.status.into();
    let y = if model == Model::Model1 { 0 } else { args.y };
    let source = args.source.unwrap_or(if model == Model::Model1 {
        TableSource::Exact
    } else {
        TableSource::Truncated
    });
    let table = match source {
        TableSource::Exact => {
            if model != Model::Model1 {
                bail!(Invalid("the exact source is available for model1 only".into()));
            }
            qbd::exact_stationary_model1(&params, exact_levels(&params, args.k_max))?
        }
        TableSource::Truncated => {
            let y_max = if model == Model::Model1 { 0 } else { args.y_max };
            qbd::truncated_stationary(&params, model, args.x_max, y_max)?
        }
        TableSource::Simulated => {
            let start = State::new(model, 0, 0, ServerStatus::Up);
            simulate::simulate_occupation(&params, model, args.steps, args.burn_in, args.seed, start)?.table
        }
    };
    if args.k_max > i64::from(table.x_max) {
        bail!(Invalid(format!("--k-max {} exceeds the table's largest level {}", args.k_max, table.x_max)));
    }
    let fit = asymptotics::tail_fit(&table, y, status, args.k_min, args.k_max)?;
    let gamma_p = spectral::characteristic_roots(&params).gamma_p;
    let seed = (source == TableSource::Simulated).then_some(args.seed);
    let meta = Metadata::new("tailfit", argv, Some(file), seed);
    let extra = [
        ("source", format!("{source:?}").to_lowercase()),
        ("y", y.to_string()),
        ("status", status.code().to_string()),
        ("gamma_est", fmt_f64(fit.gamma_est)),
        ("log_prefactor_est", fmt_f64(fit.log_prefactor_est)),
        ("max_relative_deviation", fmt_f64(fit.max_relative_deviation)),
        ("gamma_p", fmt_f64(gamma_p)),
    ];
    let path = output_path(&args.out.out, "tailfit.csv")?;
    let mut csv = CsvOutput::create(&path, &meta, &extra, &["k", "probability", "fitted", "relative_deviation"])?;
    for k in args.k_min..=args.k_max {
        let observed = table.at(k, y, status);
        let fitted = fit.predict(k);
        csv.row([k.to_string(), fmt_f64(observed), fmt_f64(fitted), fmt_f64(observed / fitted - 1.0)])?;
    }
    csv.finish()?;
    println!("gamma_est = {}  (gamma_p = {})", fmt_f64(fit.gamma_est), fmt_f64(gamma_p));
    Ok(0)
}

#[derive(Serialize)]
struct LevelComparison {
    k: u32,
    queue: f64,
    mm1: f64,
}

#[derive(Serialize)]
struct CompareReport {
    comparison: Mm1Comparison,
    /// `mu p - (lambda + beta)`; its sign picks the dominant status.
    regime_sign: f64,
    predicted_regime: Option<Regime>,
    alpha_limits: Option<AlphaLimits>,
    levels: Vec<LevelComparison>,
    notes: Vec<String>,
}

fn compare_mm1(args: &CompareArgs, argv: &[String]) -> anyhow::Result<i32> {
    let (params, model, file) = args.params.resolve()?;
    let comparison = asymptotics::mm1_comparison(&params)?;
    let mut notes = Vec::new();
    let predicted_regime = simulate::regime_prediction(&params)
        .map_err(|e| notes.push(e.to_string()))
        .ok();
    let alpha_limits = asymptotics::alpha_limits(params.lambda, params.mu, params.beta, params.p, model)
        .map_err(|e| notes.push(format!("alpha limits skipped: {e}")))
        .ok();
    let mut levels = Vec::new();
    if model == Model::Model1 {
        let sol = qbd::Model1Solution::solve(&params)?;
        for k in 0..=args.levels {
            let v = sol.level(k);
            levels.push(LevelComparison {
                k,
                queue: v[0] + v[1],
                mm1: asymptotics::mm1_stationary(&params, k),
            });
        }
    }
    let report = CompareReport {
        comparison,
        regime_sign: params.mu * params.p - (params.lambda + params.beta),
        predicted_regime,
        alpha_limits,
        levels,
        notes,
    };
    let meta = Metadata::new("compare-mm1", argv, Some(file), None);
    let path = output_path(&args.out.out, "compare_mm1.json")?;
    write_report(&path, &meta, &report)?;
    println!(
        "gamma_p = {}  M/M/1 ratio = {}  dominance = {}",
        fmt_f64(comparison.gamma_1),
        fmt_f64(comparison.mm1_ratio),
        comparison.dominance
    );
    Ok(0)
}

fn verify_cmd(args: &VerifyArgs, argv: &[String]) -> anyhow::Result<i32> {
    if args.grid == 0 {
        bail!(Invalid("--grid must be at least 1".into()));
    }
    let results = verify::run(&VerifyOptions {
        grid: args.grid,
        seed: args.seed,
    });
    let meta = Metadata::new("verify", argv, None, Some(args.seed));
    let path = output_path(&args.out.out, "verify.csv")?;
    let mut csv = CsvOutput::create(&path, &meta, &[("grid", args.grid.to_string())], &["check", "pass", "detail"])?;
    let mut failed = 0;
    for r in &results {
        println!("{} {}: {}", if r.pass { "PASS" } else { "FAIL" }, r.name, r.detail);
        csv.row([r.name, if r.pass { "true" } else { "false" }, r.detail.as_str()])?;
        failed += usize::from(!r.pass);
    }
    csv.finish()?;
    println!("{} of {} checks passed", results.len() - failed, results.len());
    Ok(if failed == 0 { 0 } else { EXIT_VERIFY })
}

/// Reads a JSON report written by this tool.
pub fn read_report(path: &Path) -> anyhow::Result<serde_json::Value> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    serde_json::from_str(&text).map_err(|e| anyhow!("parsing {}: {e}", path.display()))
}
