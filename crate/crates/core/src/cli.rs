//! Command-line front end.
//!
//! Exit codes: 0 success, 2 usage or data error, 3 solver failure,
//! 10 when the monitor terminates a run.

use std::ffi::OsString;
use std::fs::File;
use std::io::{BufRead, BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{ArgGroup, Args, Parser, Subcommand};
use serde::Serialize;

use crate::data::{load_csv, Column, ColumnData, ColumnKind, Dataset, IngestConfig};
use crate::error::{Error, Result};
use crate::mi::{Method, MiEngine, SolverConfig};
use crate::monitor::{
    batch_analysis, read_runs, run_protocol, Direction, MonitorConfig, SessionEnd,
};
use crate::report::{opt4, sig4, Report, Table};
use crate::selection::{residual_iteration, underused_variables, SelectConfig};
use crate::synth::{generate, sigma_for_target_r2, SynthFunction, SynthKind, SynthSpec};
use crate::valuation::{
    incremental_value, model_generalized_metrics, suboptimality_gap, value_with, AchievablePerformance, Metric,
    TargetProfile,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_SOLVER: i32 = 3;
pub const EXIT_TERMINATED: i32 = 10;

/// Environment variable capping the worker-thread count.
pub const THREADS_ENV: &str = "LEANVIZ_THREADS";

#[derive(Debug, Parser)]
#[command(name = "leanml", version, about = "Model-free data valuation and lean model building")]
struct Cli {
    /// Input CSV with a header row.
    #[arg(long, global = true)]
    data: Option<PathBuf>,
    /// key=value configuration file.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Target column (defaults to the last column).
    #[arg(long, global = true)]
    target: Option<String>,
    /// Seed for quadrature shifts and synthetic data.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Estimator: mind or gaussian.
    #[arg(long, global = true)]
    method: Option<Method>,
    /// JSON-lines report path (CSV output for `synth`).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Theoretical-best performance from a set of features.
    Value(ValueArgs),
    /// Greedy model-free variable selection.
    Select(SelectArgs),
    /// Headroom of a trained model, or value of new features.
    Improve(ImproveArgs),
    /// Early-termination monitor (stdin protocol or batch analysis).
    Monitor(MonitorArgs),
    /// Generate a synthetic benchmark dataset as CSV.
    Synth(SynthArgs),
}

#[derive(Debug, Args)]
struct ValueArgs {
    /// Comma-separated features; all non-target columns when omitted.
    #[arg(long)]
    features: Option<String>,
}

#[derive(Debug, Args)]
struct SelectArgs {
    #[arg(long)]
    capacity: Option<usize>,
    #[arg(long, default_value_t = 0.95)]
    fraction: f64,
}

#[derive(Debug, Args)]
#[command(group(ArgGroup::new("mode").required(true).args(["predictions", "new_features"])))]
struct ImproveArgs {
    /// CSV of model predictions aligned with the dataset rows.
    #[arg(long)]
    predictions: Option<PathBuf>,
    /// Column of the predictions file to use (default: first).
    #[arg(long, requires = "predictions")]
    prediction_column: Option<String>,
    /// Comma-separated candidate features to add.
    #[arg(long)]
    new_features: Option<String>,
    /// Comma-separated features already in use (default: all others).
    #[arg(long, requires = "new_features")]
    base_features: Option<String>,
    /// Gap magnitude treated as "at the theoretical best".
    #[arg(long, default_value_t = 0.02)]
    gap_threshold: f64,
}

#[derive(Debug, Args)]
struct MonitorArgs {
    /// Theoretical-best value of the monitored metric.
    #[arg(long)]
    best: f64,
    /// higher or lower is better.
    #[arg(long, default_value = "higher")]
    direction: Direction,
    #[arg(long, default_value_t = 0.0)]
    threshold: f64,
    #[arg(long, default_value_t = 1)]
    patience: usize,
    /// JSON-lines run records to analyse instead of reading the protocol.
    #[arg(long)]
    runs: Option<PathBuf>,
    #[arg(long, default_value_t = crate::monitor::DEFAULT_OVERFIT_MARGIN)]
    overfit_margin: f64,
}

#[derive(Debug, Args)]
#[command(group(ArgGroup::new("noise").required(true).args(["sigma", "flip_probability", "target_r2"])))]
struct SynthArgs {
    /// f1, f2, f3 or f4.
    #[arg(long)]
    function: SynthFunction,
    #[arg(long)]
    dimension: usize,
    /// Regression noise standard deviation.
    #[arg(long)]
    sigma: Option<f64>,
    /// Classification label-flip probability.
    #[arg(long)]
    flip_probability: Option<f64>,
    /// Regression noise chosen to give this best R².
    #[arg(long)]
    target_r2: Option<f64>,
    /// Row count (default 1000 × dimension).
    #[arg(long)]
    rows: Option<usize>,
    #[arg(long, default_value_t = 0)]
    replicate: u64,
}

fn exit_code(err: &Error) -> i32 {
    if err.is_solver() {
        EXIT_SOLVER
    } else {
        EXIT_USAGE
    }
}

/// Parse `args` (including the program name) and execute.
pub fn run<I, T>(args: I, stdin: &mut dyn BufRead, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let sink: &mut dyn Write = if e.use_stderr() { stderr } else { stdout };
            let _ = write!(sink, "{}", e.render());
            return code;
        }
    };
    let threads = match std::env::var(THREADS_ENV) {
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(n) if n > 0 => Some(n),
            _ => {
                let _ = writeln!(stderr, "error: {THREADS_ENV} must be a positive integer, got '{v}'");
                return EXIT_USAGE;
            }
        },
        Err(_) => None,
    };
    if let Some(n) = threads {
        // the global pool can only be configured once per process; later calls keep the first setting
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    match execute(&cli, stdin, stdout) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            exit_code(&e)
        }
    }
}

struct Context {
    ingest: IngestConfig,
    solver: SolverConfig,
}

fn context(cli: &Cli) -> Result<Context> {
    let (mut ingest, mut solver) = match &cli.config {
        Some(path) => crate::config::load(path)?,
        None => (IngestConfig::default(), SolverConfig::default()),
    };
    if let Some(t) = &cli.target {
        ingest.target = Some(t.clone());
    }
    if let Some(m) = cli.method {
        solver.method = m;
    }
    if let Some(s) = cli.seed {
        solver.quadrature_seed = s;
    }
    solver.validate()?;
    Ok(Context { ingest, solver })
}

fn load(cli: &Cli, ctx: &Context) -> Result<Dataset> {
    let path = cli
        .data
        .as_ref()
        .ok_or_else(|| Error::InvalidArgument("--data is required for this command".into()))?;
    load_csv(path, &ctx.ingest)
}

fn split_list(list: &str) -> Vec<String> {
    list.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(str::to_string)
        .collect()
}

fn execute(cli: &Cli, stdin: &mut dyn BufRead, stdout: &mut dyn Write) -> Result<i32> {
    match &cli.command {
        Command::Value(args) => emit(cli, stdout, cmd_value(cli, args)?),
        Command::Select(args) => emit(cli, stdout, cmd_select(cli, args)?),
        Command::Improve(args) => emit(cli, stdout, cmd_improve(cli, args)?),
        Command::Monitor(args) => cmd_monitor(cli, args, stdin, stdout),
        Command::Synth(args) => cmd_synth(cli, args, stdout),
    }
}

fn emit(cli: &Cli, stdout: &mut dyn Write, report: Report) -> Result<i32> {
    stdout.write_all(report.rendered_text().as_bytes())?;
    stdout.flush()?;
    if let Some(path) = &cli.out {
        report.write_json_lines(BufWriter::new(File::create(path)?))?;
    }
    Ok(EXIT_OK)
}

#[derive(Serialize)]
struct CommandEcho<'a> {
    command: &'a str,
    data: Option<String>,
    target: &'a str,
    method: &'a str,
    seed: u64,
}

#[derive(Serialize)]
struct ColumnSummary<'a> {
    name: &'a str,
    kind: &'a str,
    cardinality: Option<usize>,
}

#[derive(Serialize)]
struct DatasetSummary<'a> {
    rows: usize,
    dropped_rows: usize,
    target: &'a str,
    columns: Vec<ColumnSummary<'a>>,
}

#[derive(Serialize)]
struct EstimatorSummary {
    method: &'static str,
    solver: crate::mi::DualSolver,
    feature_map: String,
    quadrature_points: usize,
    quadrature_seed: u64,
    max_iters: usize,
    grad_tol: f64,
    min_entropy: f64,
    max_blocks: usize,
}

fn header(report: &mut Report, cli: &Cli, command: &str, ds: &Dataset, engine: &MiEngine<'_>) -> Result<()> {
    let cfg = engine.config();
    report.record(
        "command",
        &CommandEcho {
            command,
            data: cli.data.as_ref().map(|p| p.display().to_string()),
            target: ds.target_name(),
            method: cfg.method.as_str(),
            seed: cfg.quadrature_seed,
        },
    )?;
    let columns = ds
        .columns()
        .iter()
        .map(|c| ColumnSummary {
            name: c.name(),
            kind: match c.kind() {
                ColumnKind::Continuous => "continuous",
                ColumnKind::Categorical => "categorical",
            },
            cardinality: c.cardinality(),
        })
        .collect();
    report.record(
        "dataset",
        &DatasetSummary {
            rows: ds.n(),
            dropped_rows: ds.dropped_rows(),
            target: ds.target_name(),
            columns,
        },
    )?;
    report.record(
        "estimator",
        &EstimatorSummary {
            method: cfg.method.as_str(),
            solver: cfg.solver,
            feature_map: engine.feature_kind().to_string(),
            quadrature_points: cfg.quadrature_points,
            quadrature_seed: cfg.quadrature_seed,
            max_iters: cfg.max_iters,
            grad_tol: cfg.grad_tol,
            min_entropy: cfg.min_entropy,
            max_blocks: cfg.max_blocks,
        },
    )?;
    let target_kind = match ds.target().kind() {
        ColumnKind::Continuous => "continuous".to_string(),
        ColumnKind::Categorical => format!("categorical, {} classes", ds.target().cardinality().unwrap_or(0)),
    };
    report.text(format!(
        "leanml {command}: target '{}' ({target_kind}), {} rows ({} dropped), method {}",
        ds.target_name(),
        ds.n(),
        ds.dropped_rows(),
        cfg.method.as_str()
    ));
    Ok(())
}

fn performance_table(title: &str, perf: &AchievablePerformance) -> Table {
    let mut t = Table::new(title, ["Metric", "Value"]);
    t.row(["Mutual information (nats)".to_string(), sig4(perf.mi.value)]);
    t.row(["Achievable R²".to_string(), sig4(perf.best_r2)]);
    if let Some(v) = perf.best_r2_normalized {
        t.row(["Achievable R² / ceiling".to_string(), sig4(v)]);
    }
    if let Some(v) = perf.best_rmse {
        t.row(["Achievable RMSE".to_string(), sig4(v)]);
    }
    if let Some(v) = perf.best_accuracy {
        t.row(["Achievable accuracy".to_string(), sig4(v)]);
    }
    t.row(["Achievable log-likelihood".to_string(), sig4(perf.best_log_likelihood)]);
    if let Some(v) = perf.diagnostics.hellman_raviv_lower {
        t.row(["Accuracy lower bound (Hellman-Raviv)".to_string(), sig4(v)]);
    }
    if let Some(v) = perf.diagnostics.brillinger_mse_lower {
        t.row(["MSE lower bound (entropy power)".to_string(), sig4(v)]);
    }
    t
}

fn cmd_value(cli: &Cli, args: &ValueArgs) -> Result<Report> {
    let ctx = context(cli)?;
    let ds = load(cli, &ctx)?;
    let engine = MiEngine::new(&ds, &ctx.solver)?;
    let profile = TargetProfile::of(&ds)?;
    let features = match &args.features {
        Some(list) => split_list(list),
        None => ds.feature_names().into_iter().map(str::to_string).collect(),
    };
    let perf = value_with(&engine, &profile, &features)?;
    let mut report = Report::default();
    header(&mut report, cli, "value", &ds, &engine)?;
    report.record("valuation", &perf)?;
    let listed = if features.is_empty() {
        "(none)".to_string()
    } else {
        features.join(", ")
    };
    report.text(format!("features: {listed}"));
    report.table(&performance_table("Achievable performance", &perf));
    if perf.mi.degenerate {
        report.text("note: some copula hit the entropy floor (near-deterministic dependence)");
    }
    Ok(report)
}

fn cmd_select(cli: &Cli, args: &SelectArgs) -> Result<Report> {
    let ctx = context(cli)?;
    let ds = load(cli, &ctx)?;
    let engine = MiEngine::new(&ds, &ctx.solver)?;
    let profile = TargetProfile::of(&ds)?;
    let select = SelectConfig {
        capacity: args.capacity,
        fraction: args.fraction,
    };
    let trace = crate::selection::greedy_select_with(&engine, &profile, &select)?;
    let mut report = Report::default();
    header(&mut report, cli, "select", &ds, &engine)?;
    report.record("selection", &trace)?;
    let classification = profile.class_frequencies.is_some();
    let last = if classification {
        "Running Achievable Accuracy"
    } else {
        "Running Achievable RMSE"
    };
    let mut t = Table::new(
        "Model-free variable selection",
        ["Selection Order", "Variable", "Running MI", "Running Achievable R²", last],
    );
    for s in &trace.steps {
        t.row([
            s.order.to_string(),
            s.variable.clone(),
            sig4(s.running_mi),
            sig4(s.running_best_r2),
            opt4(if classification {
                s.running_best_accuracy
            } else {
                s.running_best_rmse
            }),
        ]);
    }
    report.table(&t);
    report.text(format!("stop reason: {}", trace.stop_reason.as_str()));
    for s in &trace.skipped {
        report.text(format!("skipped '{}' at step {}: {}", s.variable, s.order, s.error));
    }
    Ok(report)
}

fn read_predictions(path: &Path, column: Option<&str>, like: &Column, rows: usize) -> Result<Column> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_path(path)?;
    let headers: Vec<String> = rdr.headers()?.iter().map(|h| h.trim().to_string()).collect();
    let index = match column {
        Some(name) => headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| Error::UnknownColumn(name.to_string()))?,
        None if headers.is_empty() => return Err(Error::EmptyFeatures),
        None => 0,
    };
    let name = headers[index].clone();
    let mut cells = Vec::new();
    for record in rdr.records() {
        let record = record?;
        let cell = record.get(index).unwrap_or("").trim().to_string();
        cells.push(cell);
    }
    if cells.len() != rows {
        return Err(Error::DimensionMismatch {
            expected: rows,
            found: cells.len(),
        });
    }
    match like.kind() {
        ColumnKind::Continuous => {
            let values = cells
                .iter()
                .map(|c| match c.parse::<f64>() {
                    Ok(v) if v.is_finite() => Ok(v),
                    _ => Err(Error::NonNumeric {
                        column: name.clone(),
                        value: c.clone(),
                    }),
                })
                .collect::<Result<Vec<f64>>>()?;
            Ok(Column::continuous(name, values))
        }
        ColumnKind::Categorical => Ok(Column::categorical(name, &cells)),
    }
}

#[derive(Serialize)]
struct ModelPerformance {
    r2: Option<f64>,
    rmse: Option<f64>,
    accuracy: Option<f64>,
}

#[derive(Serialize)]
struct GapRow {
    metric: Metric,
    model: f64,
    achievable: f64,
    gap: f64,
}

#[derive(Serialize)]
struct Recommendation<'a> {
    primary_metric: Metric,
    gap: f64,
    threshold: f64,
    recommendation: &'a str,
}

fn classic_performance(y: &Column, predictions: &Column) -> ModelPerformance {
    match (&y.data, &predictions.data) {
        (ColumnData::Continuous(y), ColumnData::Continuous(p)) => {
            let n = y.len() as f64;
            let mean = y.iter().sum::<f64>() / n;
            let sse: f64 = y.iter().zip(p).map(|(a, b)| (a - b) * (a - b)).sum();
            let sst: f64 = y.iter().map(|a| (a - mean) * (a - mean)).sum();
            ModelPerformance {
                r2: Some(1.0 - sse / sst),
                rmse: Some((sse / n).sqrt()),
                accuracy: None,
            }
        }
        _ => {
            let n = y.data.len();
            let hits = (0..n)
                .filter(|&i| {
                    let a = y.as_codes().and_then(|c| y.decode(c[i]));
                    let b = predictions.as_codes().and_then(|c| predictions.decode(c[i]));
                    a.is_some() && a == b
                })
                .count();
            ModelPerformance {
                r2: None,
                rmse: None,
                accuracy: Some(hits as f64 / n as f64),
            }
        }
    }
}

fn cmd_improve(cli: &Cli, args: &ImproveArgs) -> Result<Report> {
    let ctx = context(cli)?;
    let ds = load(cli, &ctx)?;
    let engine = MiEngine::new(&ds, &ctx.solver)?;
    let profile = TargetProfile::of(&ds)?;
    let mut report = Report::default();
    header(&mut report, cli, "improve", &ds, &engine)?;

    if let Some(list) = &args.new_features {
        let new = split_list(list);
        if new.is_empty() {
            return Err(Error::EmptyFeatures);
        }
        let base = match &args.base_features {
            Some(b) => split_list(b),
            None => ds
                .feature_names()
                .into_iter()
                .filter(|f| !new.iter().any(|n| n == f))
                .map(str::to_string)
                .collect(),
        };
        let inc = incremental_value(&ds, &base, &new, &ctx.solver)?;
        report.record("improvement", &inc)?;
        report.text(format!("base features: {}", if base.is_empty() { "(none)".into() } else { base.join(", ") }));
        report.text(format!("new features: {}", new.join(", ")));
        let mut t = Table::new("Incremental value", ["Metric", "Base", "Combined", "Boost"]);
        t.row([
            "Mutual information (nats)".to_string(),
            sig4(inc.old.mi.value),
            sig4(inc.combined.mi.value),
            sig4(inc.boost.mi),
        ]);
        t.row([
            "Achievable R²".to_string(),
            sig4(inc.old.best_r2),
            sig4(inc.combined.best_r2),
            sig4(inc.boost.best_r2),
        ]);
        if let Some(b) = inc.boost.best_rmse {
            t.row([
                "Achievable RMSE (reduction)".to_string(),
                opt4(inc.old.best_rmse),
                opt4(inc.combined.best_rmse),
                sig4(b),
            ]);
        }
        if let Some(b) = inc.boost.best_accuracy {
            t.row([
                "Achievable accuracy".to_string(),
                opt4(inc.old.best_accuracy),
                opt4(inc.combined.best_accuracy),
                sig4(b),
            ]);
        }
        t.row([
            "Achievable log-likelihood".to_string(),
            sig4(inc.old.best_log_likelihood),
            sig4(inc.combined.best_log_likelihood),
            sig4(inc.boost.best_log_likelihood),
        ]);
        report.table(&t);
        return Ok(report);
    }

    let path = args.predictions.as_ref().expect("clap enforces one mode");
    let predictions = read_predictions(path, args.prediction_column.as_deref(), ds.target(), ds.n())?;
    let features: Vec<String> = ds.feature_names().into_iter().map(str::to_string).collect();
    let achievable = value_with(&engine, &profile, &features)?;
    report.record("valuation", &achievable)?;

    let model = classic_performance(ds.target(), &predictions);
    report.record("model_performance", &model)?;
    let mut gaps = Vec::new();
    for (metric, value) in [
        (Metric::R2, model.r2),
        (Metric::Rmse, model.rmse),
        (Metric::Accuracy, model.accuracy),
    ] {
        if let Some(v) = value {
            gaps.push(GapRow {
                metric,
                model: v,
                achievable: achievable.metric(metric).expect("metric matches target kind"),
                gap: suboptimality_gap(v, &achievable, metric)?,
            });
        }
    }
    for g in &gaps {
        report.record("gap", g)?;
    }
    let primary = &gaps[0];
    let advice = if primary.gap < -args.gap_threshold {
        "model likely overfit"
    } else if primary.gap <= args.gap_threshold {
        "seek new variables"
    } else {
        "improve the model with the existing variables"
    };
    report.record(
        "recommendation",
        &Recommendation {
            primary_metric: primary.metric,
            gap: primary.gap,
            threshold: args.gap_threshold,
            recommendation: advice,
        },
    )?;
    let mut t = Table::new("Suboptimality", ["Metric", "Model", "Achievable", "Gap"]);
    for g in &gaps {
        t.row([g.metric.as_str().to_string(), sig4(g.model), sig4(g.achievable), sig4(g.gap)]);
    }
    report.table(&t);
    if advice == "model likely overfit" {
        report.text("warning: model likely overfit (performance beyond the theoretical best)");
    }
    report.text(format!("recommendation: {advice}"));

    match model_generalized_metrics(ds.target(), &predictions, &ctx.solver) {
        Ok(g) => {
            report.record("generalized_metrics", &g)?;
            report.text(format!(
                "model generalized R²: {}{}",
                sig4(g.generalized_r2),
                g.generalized_mse
                    .map(|m| format!(", generalized MSE: {}", sig4(m)))
                    .unwrap_or_default()
            ));
        }
        Err(e) => report.text(format!("generalized metrics unavailable: {e}")),
    }

    let underused = underused_variables(&ds, &predictions, &ctx.solver)?;
    report.record("underused", &underused)?;
    let mut t = Table::new("Under-used variables", ["Variable", "Rank for target", "Rank for predictions"]);
    for u in &underused.underused {
        t.row([
            u.variable.clone(),
            u.rank_for_target.to_string(),
            u.rank_for_predictions.map(|r| r.to_string()).unwrap_or_else(|| "-".into()),
        ]);
    }
    report.table(&t);
    if let Some(w) = &underused.warning {
        report.text(format!("warning: {w}"));
    }

    if let (Some(_), Some(p)) = (ds.target().as_continuous(), predictions.as_continuous()) {
        match residual_iteration(&ds, p, &ctx.solver) {
            Ok(residual) => {
                report.record("residual_valuation", &residual.valuation)?;
                report.table(&performance_table("Residual achievable performance", &residual.valuation));
            }
            Err(e) if e.is_solver() => return Err(e),
            Err(e) => report.text(format!("residual valuation unavailable: {e}")),
        }
    }
    Ok(report)
}

fn cmd_monitor(cli: &Cli, args: &MonitorArgs, stdin: &mut dyn BufRead, stdout: &mut dyn Write) -> Result<i32> {
    let cfg = MonitorConfig {
        best_value: args.best,
        direction: args.direction,
        threshold: args.threshold,
        patience: args.patience,
    };
    cfg.validate()?;
    if let Some(path) = &args.runs {
        let runs = read_runs(std::io::BufReader::new(File::open(path)?))?;
        let analysis = batch_analysis(&runs, &cfg, args.overfit_margin)?;
        let mut report = Report::default();
        report.record("monitor_config", &cfg)?;
        report.record("batch_analysis", &analysis)?;
        let mut t = Table::new("Early-termination analysis", ["Quantity", "Value"]);
        t.row(["Runs".to_string(), analysis.runs.len().to_string()]);
        t.row(["Terminated".to_string(), analysis.terminated.to_string()]);
        t.row(["Overfit rate".to_string(), sig4(analysis.overfit_rate)]);
        t.row(["Regret".to_string(), sig4(analysis.regret)]);
        t.row(["Opportunity cost".to_string(), sig4(analysis.opportunity_cost)]);
        report.table(&t);
        return emit(cli, stdout, report);
    }
    let end = run_protocol(cfg, stdin, &mut *stdout)?;
    if let Some(path) = &cli.out {
        #[derive(Serialize)]
        struct Session {
            terminated: bool,
            epoch: Option<u64>,
        }
        let session = match end {
            SessionEnd::Terminated { epoch } => Session {
                terminated: true,
                epoch: Some(epoch),
            },
            SessionEnd::EndOfInput => Session {
                terminated: false,
                epoch: None,
            },
        };
        let mut report = Report::default();
        report.record("monitor_config", &cfg)?;
        report.record("monitor_session", &session)?;
        report.write_json_lines(BufWriter::new(File::create(path)?))?;
    }
    Ok(match end {
        SessionEnd::Terminated { .. } => EXIT_TERMINATED,
        SessionEnd::EndOfInput => EXIT_OK,
    })
}

fn cmd_synth(cli: &Cli, args: &SynthArgs, stdout: &mut dyn Write) -> Result<i32> {
    let kind = match (args.sigma, args.flip_probability, args.target_r2) {
        (Some(sigma), _, _) => SynthKind::Regression { sigma },
        (_, Some(p), _) => SynthKind::Classification { flip_probability: p },
        (_, _, Some(r2)) => SynthKind::Regression {
            sigma: sigma_for_target_r2(r2)?,
        },
        _ => unreachable!("clap enforces one noise option"),
    };
    let spec = SynthSpec {
        rows: args.rows,
        replicate: args.replicate,
        ..SynthSpec::new(args.function, args.dimension, kind, cli.seed.unwrap_or(0))
    };
    let ds = generate(&spec)?;
    match &cli.out {
        Some(path) => ds.to_csv(BufWriter::new(File::create(path)?))?,
        None => ds.to_csv(&mut *stdout)?,
    }
    Ok(EXIT_OK)
}
