//! Command-line front end.
//!
//! A run is described by an [`ExperimentConfig`]. It is assembled from the
//! per-experiment defaults, then an optional `--config` JSON file, then the
//! flags. Each flag sets exactly one JSON path (`--gamma` is
//! `two_stage.gamma`, `--xi` is `model.xi`, ...). The resolved config is
//! echoed into every report.
//!
//! Exit status: 0 on success, 1 on usage or configuration errors, 2 when
//! the experiment itself fails (gate violation, degenerate limit, ...).

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};
use serde_json::{json, Map, Value};

use crate::harness::{
    ErrorSummary, Estimator, Harness, Prop33Params, ReplicationRow, MAX_VACUOUS_FRACTION,
};
use crate::limit_laws::{DriftSpec, PathGrid};
use crate::model::{CurveSpec, DesignSpec, ModelSpec, SymmetricDensity};
use crate::report::write_outputs;
use crate::two_stage::{Problem, TwoStageConfig};
use crate::{Error, Result};

/// Slope tolerance used for the PASS/FAIL summary of rate experiments.
pub const SLOPE_TOLERANCE: f64 = 0.1;
/// KS threshold used for the PASS/FAIL summary of distribution checks.
pub const KS_THRESHOLD: f64 = 0.08;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Experiment {
    Simulate,
    Rate,
    Allocate,
    DistCheck,
    Risk,
    Limits,
    Prop33,
    Asymmetry,
}

impl Experiment {
    pub fn name(&self) -> &'static str {
        match self {
            Experiment::Simulate => "simulate",
            Experiment::Rate => "rate",
            Experiment::Allocate => "allocate",
            Experiment::DistCheck => "dist-check",
            Experiment::Risk => "risk",
            Experiment::Limits => "limits",
            Experiment::Prop33 => "prop33",
            Experiment::Asymmetry => "asymmetry",
        }
    }

    fn default_problem(&self) -> Problem {
        match self {
            Experiment::Risk => Problem::Classification,
            Experiment::Asymmetry => Problem::Mode,
            _ => Problem::ChangePoint,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EstimatorKind {
    TwoStage,
    OneStage,
}

/// Everything a run needs, after defaulting.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: Experiment,
    pub model: ModelSpec,
    pub two_stage: TwoStageConfig,
    /// Rate experiments: two-stage procedure or one-stage baseline.
    pub estimator: EstimatorKind,
    /// Design of the one-stage baseline.
    pub one_stage_design: DesignSpec,
    pub summary: ErrorSummary,
    pub n_grid: Vec<u64>,
    pub p_grid: Vec<f64>,
    pub reps: usize,
    pub seed: u64,
    /// Output path prefix.
    pub out: String,
    /// Limit-law draws (`limits`) and oracle draws (`dist-check`).
    pub draws: usize,
    pub drift: DriftSpec,
    pub path_grid: PathGrid,
    pub scale_multiplier: f64,
    /// Oracle design density of the one-stage classifier (`risk`).
    pub oracle_density: SymmetricDensity,
    /// Miss probability and inflation of the practical half-width (`allocate`).
    pub tau: f64,
    pub quantile_inflation: f64,
    pub stage_one_reps: usize,
    pub prop33: Prop33Params,
}

fn pow2_grid(lo: u32, hi: u32) -> Vec<u64> {
    (lo..=hi).map(|k| 1u64 << k).collect()
}

impl ExperimentConfig {
    /// Defaults for an experiment on a problem.
    pub fn defaults(experiment: Experiment, problem: Problem) -> Self {
        let mut model = ModelSpec::default_for(problem);
        let mut two_stage = TwoStageConfig::default_for(problem, 4096);
        let mut n_grid = pow2_grid(10, 15);
        let mut reps = 500;
        let mut draws = 10_000;
        match experiment {
            Experiment::Simulate => reps = 100,
            Experiment::Rate | Experiment::Risk | Experiment::Limits => {}
            Experiment::Allocate => {
                two_stage.n = 1 << 14;
                reps = 1000;
                match problem {
                    Problem::ChangePoint => model.xi = 0.0,
                    Problem::Mode => two_stage.b = 0.2,
                    _ => {}
                }
            }
            Experiment::DistCheck => {
                two_stage.n = 1 << 14;
                reps = 2000;
                draws = 2000;
            }
            Experiment::Prop33 => {
                n_grid = vec![1 << 16];
                reps = 5000;
            }
            Experiment::Asymmetry => {
                model = ModelSpec::unimodal(CurveSpec::ExpCusp { rate: 1.0 }, 0.5, 0.25, 0.1)
                    .with_asymmetry(2.0, 1.0);
                n_grid = vec![1 << 16];
            }
        }
        ExperimentConfig {
            experiment,
            model,
            two_stage,
            estimator: EstimatorKind::TwoStage,
            one_stage_design: DesignSpec::unit(),
            summary: ErrorSummary::Rmse,
            n_grid,
            p_grid: (1..=9).map(|i| i as f64 / 10.0).collect(),
            reps,
            seed: 0,
            out: String::new(),
            draws,
            drift: DriftSpec::for_problem(problem),
            path_grid: PathGrid::default(),
            scale_multiplier: 1.0,
            oracle_density: SymmetricDensity::Epanechnikov,
            tau: 0.002,
            quantile_inflation: 1.5,
            stage_one_reps: 20_000,
            prop33: Prop33Params::default(),
        }
    }

    fn validate(&self) -> Result<()> {
        if self.reps == 0 {
            return Err(Error::invalid("reps must be ≥ 1"));
        }
        if self.n_grid.is_empty() || self.n_grid.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::invalid("n_grid must be non-empty and strictly increasing"));
        }
        Ok(())
    }
}

#[derive(Debug, Parser)]
#[command(name = "twostage", version, about = "Two-stage zoom-in M-estimation experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Two-stage replications at a single budget
    Simulate(Flags),
    /// Log-log convergence rate over a budget grid
    Rate(Flags),
    /// Variance of the second-stage estimate across stage-one fractions
    Allocate(Flags),
    /// KS distance between standardized errors and the limit law
    DistCheck(Flags),
    /// Excess classification risk, two-stage vs oracle-design one-stage
    Risk(Flags),
    /// Draws of a normalized limit law
    Limits(Flags),
    /// Variance of the local change-point process difference
    Prop33(Flags),
    /// Bias of the one-stage mode estimator under an asymmetric peak
    Asymmetry(Flags),
}

#[derive(Debug, Args)]
struct Flags {
    /// JSON experiment configuration
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    reps: Option<usize>,
    /// Output prefix; writes <prefix>.report.json and <prefix>.data.csv
    #[arg(long)]
    out: Option<String>,
    /// Worker threads (0 = all cores); never changes results
    #[arg(long, default_value_t = 0)]
    jobs: usize,
    /// Record wall-clock milliseconds per replication
    #[arg(long)]
    timing: bool,
    /// changepoint | inverse_isotonic | classification | mode
    #[arg(long)]
    problem: Option<String>,
    #[arg(long)]
    n: Option<u64>,
    #[arg(long)]
    p: Option<f64>,
    #[arg(long)]
    gamma: Option<f64>,
    #[arg(long = "K", alias = "k")]
    k: Option<f64>,
    #[arg(long)]
    b: Option<f64>,
    /// uniform | triangular | epanechnikov
    #[arg(long)]
    second_stage_design: Option<String>,
    #[arg(long)]
    xi: Option<f64>,
    #[arg(long)]
    sigma: Option<f64>,
    #[arg(long)]
    c0: Option<f64>,
    /// Comma-separated budgets
    #[arg(long, value_delimiter = ',')]
    n_grid: Option<Vec<u64>>,
    /// Comma-separated stage-one fractions
    #[arg(long, value_delimiter = ',')]
    p_grid: Option<Vec<f64>>,
    /// two_stage | one_stage
    #[arg(long)]
    estimator: Option<String>,
    /// Use MAE instead of RMSE as the error summary
    #[arg(long)]
    mae: bool,
    #[arg(long)]
    draws: Option<usize>,
    /// abs | chernoff-min | chernoff-max
    #[arg(long)]
    drift: Option<String>,
    #[arg(long)]
    scale_multiplier: Option<f64>,
    #[arg(long)]
    tau: Option<f64>,
    /// Local offset of the change-point process
    #[arg(long)]
    h: Option<f64>,
}

/// Config load or flag error; maps to exit status 1.
#[derive(Debug)]
pub struct ConfigError(pub String);

impl std::fmt::Display for ConfigError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

fn set_path(root: &mut Value, path: &str, v: Value) {
    let mut cur = root;
    let parts: Vec<&str> = path.split('.').collect();
    for part in &parts[..parts.len() - 1] {
        if !cur.get(*part).is_some_and(Value::is_object) {
            cur[*part] = Value::Object(Map::new());
        }
        cur = cur.get_mut(*part).unwrap();
    }
    cur[parts[parts.len() - 1]] = v;
}

const TAGS: [&str; 5] = ["family", "type", "name", "kind", "shape"];

/// Deep-merge `over` into `base`; a changed enum tag replaces the object.
fn merge(base: &mut Value, over: Value) {
    match (base, over) {
        (Value::Object(b), Value::Object(o)) => {
            let tag_changed = TAGS.iter().any(|t| matches!((b.get(*t), o.get(*t)), (Some(x), Some(y)) if x != y));
            let variant_changed = b.len() == 1 && o.len() == 1 && b.keys().next() != o.keys().next();
            if tag_changed || variant_changed {
                *b = o;
                return;
            }
            for (k, v) in o {
                match b.get_mut(&k) {
                    Some(bv) => merge(bv, v),
                    None => {
                        b.insert(k, v);
                    }
                }
            }
        }
        (b, o) => *b = o,
    }
}

fn design_value(name: &str) -> std::result::Result<Value, ConfigError> {
    Ok(match name {
        "uniform" => json!({"type": "uniform"}),
        "triangular" | "epanechnikov" => json!({"type": "symmetric", "density": {"name": name}}),
        other => return Err(ConfigError(format!("unknown second-stage design '{other}'"))),
    })
}

fn drift_value(name: &str) -> std::result::Result<Value, ConfigError> {
    let d = match name {
        "abs" => DriftSpec::abs_min(),
        "chernoff-min" | "chernoff_min" => DriftSpec::chernoff_min(),
        "chernoff-max" | "chernoff_max" => DriftSpec::chernoff_max(),
        other => return Err(ConfigError(format!("unknown drift '{other}'"))),
    };
    Ok(serde_json::to_value(d).expect("drift serializes"))
}

/// Flag overrides as `(JSON path, value)` pairs.
fn overrides(f: &Flags) -> std::result::Result<Vec<(&'static str, Value)>, ConfigError> {
    let mut o: Vec<(&'static str, Value)> = Vec::new();
    if let Some(v) = f.seed {
        o.push(("seed", json!(v)));
    }
    if let Some(v) = f.reps {
        o.push(("reps", json!(v)));
    }
    if let Some(v) = &f.out {
        o.push(("out", json!(v)));
    }
    if let Some(v) = &f.problem {
        let p: Problem = v.parse().map_err(|e: Error| ConfigError(e.to_string()))?;
        o.push(("two_stage.problem", json!(p)));
    }
    for (path, v) in [
        ("two_stage.n", f.n.map(|v| json!(v))),
        ("two_stage.p", f.p.map(|v| json!(v))),
        ("two_stage.gamma", f.gamma.map(|v| json!(v))),
        ("two_stage.K", f.k.map(|v| json!(v))),
        ("two_stage.b", f.b.map(|v| json!(v))),
        ("model.xi", f.xi.map(|v| json!(v))),
        ("model.sigma", f.sigma.map(|v| json!(v))),
        ("model.c0", f.c0.map(|v| json!(v))),
        ("n_grid", f.n_grid.as_ref().map(|v| json!(v))),
        ("p_grid", f.p_grid.as_ref().map(|v| json!(v))),
        ("estimator", f.estimator.as_ref().map(|v| json!(v))),
        ("draws", f.draws.map(|v| json!(v))),
        ("scale_multiplier", f.scale_multiplier.map(|v| json!(v))),
        ("tau", f.tau.map(|v| json!(v))),
        ("prop33.h", f.h.map(|v| json!(v))),
    ] {
        if let Some(v) = v {
            o.push((path, v));
        }
    }
    if f.mae {
        o.push(("summary", json!("mae")));
    }
    if let Some(v) = &f.second_stage_design {
        o.push(("two_stage.second_stage_design", design_value(v)?));
    }
    if let Some(v) = &f.drift {
        o.push(("drift", drift_value(v)?));
    }
    Ok(o)
}

/// Resolve defaults, an optional config document and flag overrides.
pub fn resolve_config(
    experiment: Experiment,
    file: Option<Value>,
    flags: &[(&str, Value)],
) -> std::result::Result<ExperimentConfig, ConfigError> {
    let mut user = file.unwrap_or_else(|| Value::Object(Map::new()));
    if !user.is_object() {
        return Err(ConfigError("config must be a JSON object".into()));
    }
    for (path, v) in flags {
        set_path(&mut user, path, v.clone());
    }
    if let Some(e) = user.get("experiment") {
        if e != &json!(experiment) {
            return Err(ConfigError(format!(
                "experiment: config is for {e}, subcommand is {}",
                experiment.name()
            )));
        }
    }
    let problem = match user.pointer("/two_stage/problem") {
        None => experiment.default_problem(),
        Some(v) => serde_json::from_value(v.clone())
            .map_err(|e| ConfigError(format!("two_stage.problem: {e}")))?,
    };
    let mut merged = serde_json::to_value(ExperimentConfig::defaults(experiment, problem))
        .expect("defaults serialize");
    merge(&mut merged, user);
    let mut cfg: ExperimentConfig = serde_path_to_error::deserialize(merged)
        .map_err(|e| ConfigError(format!("{}: {}", e.path(), e.inner())))?;
    cfg.two_stage.seed = cfg.seed;
    if cfg.out.is_empty() {
        cfg.out = match experiment {
            Experiment::Limits | Experiment::Prop33 => format!("{}-seed{}", experiment.name(), cfg.seed),
            _ => format!("{}-{}-seed{}", experiment.name(), problem, cfg.seed),
        };
    }
    cfg.validate().map_err(|e| ConfigError(e.to_string()))?;
    Ok(cfg)
}

fn load_file(path: &Path) -> std::result::Result<Value, ConfigError> {
    let text = std::fs::read_to_string(path).map_err(|e| ConfigError(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| ConfigError(format!("{}: {e}", path.display())))
}

/// Outcome of one experiment: rows for the CSV, a result object for the
/// JSON report and a one-line summary.
struct Outcome {
    result: Value,
    csv: String,
    summary: String,
}

fn verdict(pass: bool) -> &'static str {
    if pass {
        "PASS"
    } else {
        "FAIL"
    }
}

#[derive(Serialize)]
struct ValueRow {
    index: usize,
    value: f64,
}

fn rows_csv<T: Serialize>(rows: &[T]) -> Result<String> {
    crate::report::csv_string(rows)
}

fn run_experiment(cfg: &mut ExperimentConfig, h: &Harness) -> Result<Outcome> {
    let model = cfg.model;
    let ts = cfg.two_stage;
    Ok(match cfg.experiment {
        Experiment::Simulate => {
            let rows = h.simulate(&model, &ts, cfg.reps)?;
            let err: Vec<f64> = rows.iter().map(|r| r.d2_hat - model.d0).collect();
            let rmse = crate::numerics::rmse(&err);
            Outcome {
                summary: format!("simulate {}: n = {}, rmse(d2) = {rmse:.6e}", ts.problem, ts.n),
                result: json!({"rmse": rmse, "mean_error": crate::numerics::mean(&err)}),
                csv: rows_csv(&rows)?,
            }
        }
        Experiment::Rate => {
            let est = match cfg.estimator {
                EstimatorKind::TwoStage => Estimator::TwoStage { config: ts },
                EstimatorKind::OneStage => Estimator::OneStage {
                    design: cfg.one_stage_design,
                },
            };
            let out = h.rate_experiment(&model, &est, &cfg.n_grid, cfg.reps, cfg.summary)?;
            let r = &out.report;
            Outcome {
                summary: format!(
                    "rate {}: slope {:.4} ± {:.4} (target {:.4}){} {}",
                    ts.problem,
                    r.slope,
                    r.slope_se,
                    r.target_slope,
                    if r.valid {
                        String::new()
                    } else {
                        format!(" [invalid: > {:.0}% vacuous windows]", 100.0 * MAX_VACUOUS_FRACTION)
                    },
                    verdict(r.within(SLOPE_TOLERANCE))
                ),
                result: serde_json::to_value(r)?,
                csv: rows_csv::<ReplicationRow>(&out.rows)?,
            }
        }
        Experiment::Allocate => {
            if ts.practical_quantile.is_none() {
                let q = h.practical_quantile_for(&model, &ts, cfg.tau, cfg.quantile_inflation, cfg.stage_one_reps)?;
                cfg.two_stage.practical_quantile = Some(q);
            }
            let r = h.allocation_experiment(&model, &cfg.two_stage, &cfg.p_grid, cfg.reps)?;
            #[derive(Serialize)]
            struct Row {
                p: f64,
                variance: f64,
                mse: f64,
                vacuous: usize,
            }
            let rows: Vec<Row> = (0..r.p_grid.len())
                .map(|i| Row {
                    p: r.p_grid[i],
                    variance: r.variance[i],
                    mse: r.mse[i],
                    vacuous: r.vacuous_counts[i],
                })
                .collect();
            let step = r.p_grid.windows(2).map(|w| w[1] - w[0]).fold(f64::INFINITY, f64::min);
            Outcome {
                summary: format!(
                    "allocate {}: argmin p = {} (optimal {:.4}) {}",
                    ts.problem,
                    r.argmin_p,
                    r.optimal_p,
                    verdict(r.argmin_within(step, 1.0))
                ),
                result: serde_json::to_value(&r)?,
                csv: rows_csv(&rows)?,
            }
        }
        Experiment::DistCheck => {
            let r = h.dist_check(&model, &ts, cfg.reps, cfg.draws, cfg.scale_multiplier, &cfg.path_grid)?;
            #[derive(Serialize)]
            struct Row {
                n: u64,
                reps: usize,
                ks_stat: f64,
                scale_used: f64,
            }
            Outcome {
                summary: format!(
                    "dist-check {}: KS = {:.4} (scale ×{}; threshold {KS_THRESHOLD}) {}",
                    ts.problem,
                    r.ks_stat,
                    r.scale_multiplier,
                    verdict(r.ks_stat < KS_THRESHOLD)
                ),
                result: serde_json::to_value(&r)?,
                csv: rows_csv(&[Row {
                    n: r.n,
                    reps: r.reps,
                    ks_stat: r.ks_stat,
                    scale_used: r.scale_used,
                }])?,
            }
        }
        Experiment::Risk => {
            let r = h.excess_risk_experiment(&model, &ts, &cfg.n_grid, cfg.reps, cfg.oracle_density)?;
            #[derive(Serialize)]
            struct Row {
                n: u64,
                two_stage_excess: f64,
                one_stage_excess: f64,
            }
            let rows: Vec<Row> = (0..r.n_grid.len())
                .map(|i| Row {
                    n: r.n_grid[i],
                    two_stage_excess: r.two_stage_excess[i],
                    one_stage_excess: r.one_stage_excess[i],
                })
                .collect();
            let last = r.n_grid.len() - 1;
            Outcome {
                summary: format!(
                    "risk: slopes two-stage {:.3} (target {:.3}), one-stage {:.3} (target {:.3}); at n = {} two-stage {} one-stage {}",
                    r.two_stage_slope,
                    r.two_stage_target,
                    r.one_stage_slope,
                    r.one_stage_target,
                    r.n_grid[last],
                    if r.two_stage_excess[last] < r.one_stage_excess[last] { "<" } else { "≥" },
                    verdict(r.two_stage_excess[last] < r.one_stage_excess[last])
                ),
                result: serde_json::to_value(&r)?,
                csv: rows_csv(&rows)?,
            }
        }
        Experiment::Limits => {
            let draws = h.limit_draws(&cfg.drift, &cfg.path_grid, cfg.draws)?;
            let rows: Vec<ValueRow> = draws
                .iter()
                .enumerate()
                .map(|(index, &value)| ValueRow { index, value })
                .collect();
            let sd = crate::numerics::variance(&draws).sqrt();
            Outcome {
                summary: format!("limits: {} draws, sd = {sd:.4}", draws.len()),
                result: json!({
                    "draws": draws.len(),
                    "mean": crate::numerics::mean(&draws),
                    "sd": sd,
                    "rescaling_factor": cfg.drift.rescaling_factor(),
                }),
                csv: rows_csv(&rows)?,
            }
        }
        Experiment::Prop33 => {
            let r = h.prop33_experiment(&cfg.prop33, &cfg.n_grid, cfg.reps)?;
            #[derive(Serialize)]
            struct Row {
                n: u64,
                variance: f64,
                skewness: f64,
                pi0_sq: f64,
                finite_n_variance: f64,
            }
            let rows: Vec<Row> = (0..r.n_grid.len())
                .map(|i| Row {
                    n: r.n_grid[i],
                    variance: r.variance[i],
                    skewness: r.skewness[i],
                    pi0_sq: r.pi0_sq,
                    finite_n_variance: r.finite_n_variance[i],
                })
                .collect();
            let last = r.n_grid.len() - 1;
            let rel = r.variance[last] / r.pi0_sq - 1.0;
            Outcome {
                summary: format!(
                    "prop33: Var(T) = {:.4} vs π₀² = {:.4} ({:+.1}%), skewness {:.3} {}",
                    r.variance[last],
                    r.pi0_sq,
                    100.0 * rel,
                    r.skewness[last],
                    verdict(rel.abs() <= 0.1 && r.skewness[last].abs() < 0.1)
                ),
                result: serde_json::to_value(&r)?,
                csv: rows_csv(&rows)?,
            }
        }
        Experiment::Asymmetry => {
            let r = h.asymmetry_bias_experiment(&model, &cfg.n_grid, cfg.reps)?;
            #[derive(Serialize)]
            struct Row {
                n: u64,
                mean_d1: f64,
                d_star: f64,
            }
            let rows: Vec<Row> = (0..r.n_grid.len())
                .map(|i| Row {
                    n: r.n_grid[i],
                    mean_d1: r.mean_d1[i],
                    d_star: r.d_star,
                })
                .collect();
            let gap = (r.mean_d1[r.n_grid.len() - 1] - r.d_star).abs();
            Outcome {
                summary: format!(
                    "asymmetry: mean d1 = {:.5} vs d* = {:.5} (|Δ| = {gap:.5}) {}",
                    r.mean_d1[r.n_grid.len() - 1],
                    r.d_star,
                    verdict(gap < 0.01)
                ),
                result: serde_json::to_value(&r)?,
                csv: rows_csv(&rows)?,
            }
        }
    })
}

/// Parse `argv`, run the experiment, write outputs; returns the exit status.
pub fn run_cli<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    let (experiment, flags) = match &cli.command {
        Command::Simulate(f) => (Experiment::Simulate, f),
        Command::Rate(f) => (Experiment::Rate, f),
        Command::Allocate(f) => (Experiment::Allocate, f),
        Command::DistCheck(f) => (Experiment::DistCheck, f),
        Command::Risk(f) => (Experiment::Risk, f),
        Command::Limits(f) => (Experiment::Limits, f),
        Command::Prop33(f) => (Experiment::Prop33, f),
        Command::Asymmetry(f) => (Experiment::Asymmetry, f),
    };
    let resolved = overrides(flags).and_then(|o| {
        let file = flags.config.as_deref().map(load_file).transpose()?;
        resolve_config(experiment, file, &o)
    });
    let mut cfg = match resolved {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return 1;
        }
    };
    let harness = match Harness::new(cfg.seed, flags.jobs) {
        Ok(mut h) => {
            h.timing = flags.timing;
            h
        }
        Err(e) => {
            eprintln!("error: {e}");
            return 1;
        }
    };
    let outcome = match run_experiment(&mut cfg, &harness) {
        Ok(o) => o,
        Err(e) => {
            eprintln!("error: {e}");
            return 2;
        }
    };
    let prefix = PathBuf::from(&cfg.out);
    match write_outputs(&prefix, experiment.name(), &cfg, &outcome.result, &outcome.csv) {
        Ok((json_path, csv_path)) => {
            println!("{}", outcome.summary);
            println!("wrote {} and {}", json_path.display(), csv_path.display());
            0
        }
        Err(e) => {
            eprintln!("error: {e}");
            2
        }
    }
}
