//! Replicated Monte Carlo experiments.
//!
//! Every replication draws from its own stream keyed by
//! `(seed, experiment id, replication)`, and results are gathered in
//! replication order, so reports do not depend on the number of worker
//! threads.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::ks::ks_two_sample;
use crate::limit_laws::{limit_sample, optimal_p, DriftSpec, PathGrid};
use crate::model::{
    risk_uniform, sample_batch, CurveSpec, DesignSpec, ModelKind, ModelSpec, SymmetricDensity,
};
use crate::numerics::{mae, mean, ols, rmse, skewness, variance};
use crate::seeding::derive_stream;
use crate::two_stage::{
    run_one_stage, run_two_stage, EstimateRecord, Problem, SecondStageDesign, TwoStageConfig,
};
use crate::{Error, Result};

/// Fraction of vacuous windows above which a rate report is invalid.
pub const MAX_VACUOUS_FRACTION: f64 = 0.05;
const JACKKNIFE_BLOCKS: usize = 10;

/// Replication runner: master seed, worker pool and timing switch.
pub struct Harness {
    pub seed: u64,
    /// Record wall-clock times in the per-replication rows.
    pub timing: bool,
    pool: rayon::ThreadPool,
}

impl Harness {
    /// `jobs = 0` uses one worker per core.
    pub fn new(seed: u64, jobs: usize) -> Result<Self> {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build()
            .map_err(|e| Error::invalid(format!("thread pool: {e}")))?;
        Ok(Harness {
            seed,
            timing: false,
            pool,
        })
    }

    /// Run `f(rep)` for `rep = 0..reps`, results in replication order.
    pub fn replicate<T, F>(&self, reps: usize, f: F) -> Result<Vec<T>>
    where
        T: Send,
        F: Fn(u64) -> Result<T> + Sync + Send,
    {
        let out: Vec<Result<T>> = self
            .pool
            .install(|| (0..reps as u64).into_par_iter().map(&f).collect());
        out.into_iter().collect()
    }

    /// Stream for replication `rep` of experiment `id`.
    pub fn stream(&self, id: &str, rep: u64) -> crate::seeding::Stream {
        derive_stream(self.seed, id, rep)
    }

    fn row(&self, n: u64, rep: u64, r: &EstimateRecord) -> ReplicationRow {
        ReplicationRow {
            n,
            rep,
            d1_hat: r.d1_hat,
            d2_hat: r.d2_hat,
            n1: r.n1,
            n2: r.n2,
            clip: r.clip_flag,
            vacuous: r.vacuous_flag,
            wall_ms: self.timing.then(|| r.wall_time.as_secs_f64() * 1e3),
        }
    }
}

/// One CSV row per replication.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReplicationRow {
    pub n: u64,
    pub rep: u64,
    pub d1_hat: f64,
    pub d2_hat: f64,
    pub n1: u64,
    pub n2: u64,
    pub clip: bool,
    pub vacuous: bool,
    pub wall_ms: Option<f64>,
}

/// Which estimator a rate experiment runs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Estimator {
    /// Two-stage procedure; `n` is overwritten per grid point.
    TwoStage { config: TwoStageConfig },
    /// Stage-one estimator on all `n` points from `design`.
    OneStage { design: DesignSpec },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ErrorSummary {
    #[default]
    Rmse,
    Mae,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateReport {
    pub n_grid: Vec<u64>,
    pub rmse: Vec<f64>,
    pub mae: Vec<f64>,
    pub summary: ErrorSummary,
    pub slope: f64,
    /// Larger of the OLS and seed-block jackknife standard errors.
    pub slope_se: f64,
    pub ols_se: f64,
    pub jackknife_se: f64,
    pub target_slope: f64,
    pub reps: usize,
    pub clip_counts: Vec<usize>,
    pub vacuous_counts: Vec<usize>,
    /// False when some `n` has more than 5% vacuous windows.
    pub valid: bool,
}

impl RateReport {
    /// `|slope − target| ≤ tol`.
    pub fn within(&self, tol: f64) -> bool {
        self.valid && (self.slope - self.target_slope).abs() <= tol
    }
}

fn is_cusp(model: &ModelSpec) -> bool {
    model.asym.is_some() || matches!(model.curve, CurveSpec::ExpCusp { .. })
}

/// Theoretical log-log slope of the error of `estimator` on `model`.
pub fn target_slope(model: &ModelSpec, estimator: &Estimator) -> f64 {
    let xi = model.xi;
    match estimator {
        Estimator::OneStage { .. } => match model.kind {
            ModelKind::ChangePoint => -(1.0 - 2.0 * xi),
            _ => -1.0 / 3.0,
        },
        Estimator::TwoStage { config } => {
            let g = config.gamma;
            match config.problem {
                Problem::ChangePoint => -(1.0 + g - 2.0 * xi),
                Problem::InverseIsotonic | Problem::Classification => -(1.0 + g) / 3.0,
                Problem::Mode if is_cusp(model) => -(1.0 + g) / 3.0,
                Problem::Mode => match config.second_stage_design {
                    SecondStageDesign::Uniform => -(1.0 - g) / 3.0,
                    SecondStageDesign::Symmetric { .. } => -1.0 / 3.0,
                },
            }
        }
    }
}

fn check_grid(n_grid: &[u64], min_len: usize) -> Result<()> {
    if n_grid.len() < min_len {
        return Err(Error::invalid(format!("n_grid needs at least {min_len} points")));
    }
    if n_grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::invalid("n_grid must be strictly increasing"));
    }
    Ok(())
}

fn slope_of(n_grid: &[u64], summary: &[f64]) -> crate::numerics::LineFit {
    let lx: Vec<f64> = n_grid.iter().map(|&n| (n as f64).ln()).collect();
    let ly: Vec<f64> = summary.iter().map(|v| v.ln()).collect();
    ols(&lx, &ly)
}

/// Fit the log-log rate of per-`n` error samples (`errors[i]` at `n_grid[i]`).
///
/// Works on any errors, simulated or supplied.
pub fn summarize_rates(
    n_grid: &[u64],
    errors: &[Vec<f64>],
    target_slope: f64,
    summary: ErrorSummary,
) -> Result<RateReport> {
    check_grid(n_grid, 3)?;
    if errors.len() != n_grid.len() {
        return Err(Error::invalid("one error vector per grid point"));
    }
    let reps = errors[0].len();
    if reps < JACKKNIFE_BLOCKS || errors.iter().any(|e| e.len() != reps) {
        return Err(Error::invalid("equal replication counts ≥ 10 required"));
    }
    let stat = |e: &[f64]| match summary {
        ErrorSummary::Rmse => rmse(e),
        ErrorSummary::Mae => mae(e),
    };
    let r: Vec<f64> = errors.iter().map(|e| rmse(e)).collect();
    let m: Vec<f64> = errors.iter().map(|e| mae(e)).collect();
    let used: Vec<f64> = errors.iter().map(|e| stat(e)).collect();
    if used.iter().any(|v| !(v.is_finite() && *v > 0.0)) {
        return Err(Error::invalid("error summaries must be finite and > 0"));
    }
    let fit = slope_of(n_grid, &used);

    // Delete-one-block jackknife over contiguous replication blocks.
    let g = JACKKNIFE_BLOCKS;
    let block = |j: usize| (j * reps / g, (j + 1) * reps / g);
    let leave_out: Vec<f64> = (0..g)
        .map(|j| {
            let (lo, hi) = block(j);
            let s: Vec<f64> = errors
                .iter()
                .map(|e| {
                    let kept: Vec<f64> = e[..lo].iter().chain(&e[hi..]).copied().collect();
                    stat(&kept)
                })
                .collect();
            slope_of(n_grid, &s).slope
        })
        .collect();
    let jm = mean(&leave_out);
    let jk = ((g - 1) as f64 / g as f64 * leave_out.iter().map(|s| (s - jm).powi(2)).sum::<f64>())
        .sqrt();

    Ok(RateReport {
        n_grid: n_grid.to_vec(),
        rmse: r,
        mae: m,
        summary,
        slope: fit.slope,
        slope_se: fit.slope_se.max(jk),
        ols_se: fit.slope_se,
        jackknife_se: jk,
        target_slope,
        reps,
        clip_counts: vec![0; n_grid.len()],
        vacuous_counts: vec![0; n_grid.len()],
        valid: true,
    })
}

fn run_estimator(
    model: &ModelSpec,
    estimator: &Estimator,
    n: u64,
    rng: &mut crate::seeding::Stream,
) -> Result<EstimateRecord> {
    match estimator {
        Estimator::TwoStage { config } => run_two_stage(model, &TwoStageConfig { n, ..*config }, rng),
        Estimator::OneStage { design } => run_one_stage(model, n, design, rng),
    }
}

fn estimator_tag(estimator: &Estimator) -> &'static str {
    match estimator {
        Estimator::TwoStage { .. } => "two",
        Estimator::OneStage { .. } => "one",
    }
}

pub struct RateOutcome {
    pub report: RateReport,
    pub rows: Vec<ReplicationRow>,
}

impl Harness {
    /// Error of `d̂₂` at each `n`, with a log-log fit of the chosen summary.
    pub fn rate_experiment(
        &self,
        model: &ModelSpec,
        estimator: &Estimator,
        n_grid: &[u64],
        reps: usize,
        summary: ErrorSummary,
    ) -> Result<RateOutcome> {
        check_grid(n_grid, 4)?;
        if reps < 100 {
            return Err(Error::invalid("rate experiments need reps ≥ 100"));
        }
        let kind = Problem::for_model(model.kind);
        let mut errors = Vec::with_capacity(n_grid.len());
        let mut rows = Vec::new();
        let mut clips = Vec::new();
        let mut vacuous = Vec::new();
        for &n in n_grid {
            let id = format!("rate/{kind}/{}/n={n}", estimator_tag(estimator));
            let recs = self.replicate(reps, |rep| {
                run_estimator(model, estimator, n, &mut self.stream(&id, rep))
            })?;
            errors.push(recs.iter().map(|r| r.d2_hat - model.d0).collect::<Vec<_>>());
            clips.push(recs.iter().filter(|r| r.clip_flag).count());
            vacuous.push(recs.iter().filter(|r| r.vacuous_flag).count());
            rows.extend(recs.iter().enumerate().map(|(i, r)| self.row(n, i as u64, r)));
        }
        let mut report = summarize_rates(n_grid, &errors, target_slope(model, estimator), summary)?;
        report.valid = vacuous
            .iter()
            .all(|&v| v as f64 <= MAX_VACUOUS_FRACTION * reps as f64);
        report.clip_counts = clips;
        report.vacuous_counts = vacuous;
        Ok(RateOutcome { report, rows })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AllocationReport {
    pub n: u64,
    pub reps: usize,
    pub p_grid: Vec<f64>,
    /// Empirical variance of `d̂₂` per `p`.
    pub variance: Vec<f64>,
    /// Mean squared error of `d̂₂` per `p`.
    pub mse: Vec<f64>,
    pub argmin_p: f64,
    /// `ν/(1+ν)` under the practical half-width rule, `γ/(1+γ)` otherwise.
    pub optimal_p: f64,
    pub vacuous_counts: Vec<usize>,
}

impl AllocationReport {
    /// Grid argmin within `cells` grid steps of the theoretical optimum.
    pub fn argmin_within(&self, step: f64, cells: f64) -> bool {
        (self.argmin_p - self.optimal_p).abs() <= cells * step + 1e-9
    }
}

impl Harness {
    /// Variance of `d̂₂` as a function of the stage-one fraction.
    ///
    /// All `p` share the replication streams (common random numbers).
    pub fn allocation_experiment(
        &self,
        model: &ModelSpec,
        template: &TwoStageConfig,
        p_grid: &[f64],
        reps: usize,
    ) -> Result<AllocationReport> {
        if p_grid.len() < 5 || p_grid.iter().any(|&p| !(p > 0.0 && p < 1.0)) {
            return Err(Error::invalid("p_grid needs ≥ 5 points in (0,1)"));
        }
        let id = format!("allocate/{}/n={}", template.problem, template.n);
        let mut variances = Vec::new();
        let mut mses = Vec::new();
        let mut vacuous = Vec::new();
        for &p in p_grid {
            let cfg = TwoStageConfig { p, ..*template };
            let recs = self.replicate(reps, |rep| run_two_stage(model, &cfg, &mut self.stream(&id, rep)))?;
            let err: Vec<f64> = recs.iter().map(|r| r.d2_hat - model.d0).collect();
            variances.push(variance(&err));
            mses.push(rmse(&err).powi(2));
            vacuous.push(recs.iter().filter(|r| r.vacuous_flag).count());
        }
        let best = (0..p_grid.len())
            .min_by(|&a, &b| variances[a].total_cmp(&variances[b]))
            .unwrap();
        let optimal = match template.practical_quantile {
            Some(_) => optimal_p(template.problem, Some(model.xi))?,
            None => template.gamma / (1.0 + template.gamma),
        };
        Ok(AllocationReport {
            n: template.n,
            reps,
            p_grid: p_grid.to_vec(),
            variance: variances,
            mse: mses,
            argmin_p: p_grid[best],
            optimal_p: optimal,
            vacuous_counts: vacuous,
        })
    }

    /// `(1 − τ/2)` quantile of `n₁^ν|d̂₁ − d₀|` from `reps` one-stage runs at `n1`.
    ///
    /// Feeds [`TwoStageConfig::practical_quantile`].
    pub fn stage_one_quantile(&self, model: &ModelSpec, n1: u64, tau: f64, reps: usize) -> Result<f64> {
        let problem = Problem::for_model(model.kind);
        let rate = problem.stage_one_rate(model.xi);
        let id = format!("stage-one-quantile/{problem}/n1={n1}");
        let scaled = self.replicate(reps, |rep| {
            let r = run_one_stage(model, n1, &DesignSpec::unit(), &mut self.stream(&id, rep))?;
            Ok((r.d1_hat - model.d0).abs() * (n1 as f64).powf(rate))
        })?;
        crate::limit_laws::empirical_quantile(&scaled, 1.0 - tau / 2.0)
    }

    /// Quantile for the practical half-width rule, estimated at the
    /// theoretically optimal split and multiplied by `inflation`.
    ///
    /// For the mode the quantile is widened by `K/(K − b)` so that the
    /// shrunken search interval, not just the sampling window, covers `d₀`.
    pub fn practical_quantile_for(
        &self,
        model: &ModelSpec,
        template: &TwoStageConfig,
        tau: f64,
        inflation: f64,
        reps: usize,
    ) -> Result<f64> {
        if !(tau > 0.0 && tau < 1.0 && inflation > 0.0) {
            return Err(Error::invalid("need tau in (0,1) and inflation > 0"));
        }
        let problem = template.problem;
        let n1 = (optimal_p(problem, Some(model.xi))? * template.n as f64).round() as u64;
        let mut stage_one_model = *model;
        let mut widen = 1.0;
        if problem == Problem::Mode {
            stage_one_model.bin_width = template.b;
            widen = template.k / (template.k - template.b);
        }
        let q = self.stage_one_quantile(&stage_one_model, n1, tau, reps)?;
        Ok(inflation * q * widen)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DistCheckReport {
    pub n: u64,
    pub reps: usize,
    pub ks_stat: f64,
    /// Finite-`n` scale `s` in `(d̂₂ − d₀)/s`, including any multiplier.
    pub scale_used: f64,
    pub scale_multiplier: f64,
    pub oracle_draws: usize,
    pub drift: DriftSpec,
}

/// Density of the standardized second-stage design at its center.
fn center_density(design: &SecondStageDesign) -> f64 {
    match design {
        SecondStageDesign::Uniform => 0.5,
        SecondStageDesign::Symmetric { density } => density.pdf(0.0),
    }
}

/// Finite-`n` scale of `d̂₂ − d₀` given the realised half-width `h`.
///
/// Plugs `n₁`, `n₂` and `h` into the limit constants, and for the mode
/// evaluates `m` and `m′` at the edge of the shrunken bin.
pub fn finite_n_scale(model: &ModelSpec, cfg: &TwoStageConfig, h: f64) -> Result<f64> {
    let (n1, n2) = cfg.split();
    let n2 = n2 as f64;
    let psi0 = center_density(&cfg.second_stage_design);
    let scale = match cfg.problem {
        Problem::ChangePoint => {
            let jump = model.jump(cfg.n);
            4.0 * model.sigma.powi(2) * h / (psi0 * n2 * jump * jump)
        }
        Problem::InverseIsotonic | Problem::Classification => {
            let var = match cfg.problem {
                Problem::Classification => {
                    let r = model.curve.value(model.d0);
                    r * (1.0 - r)
                }
                _ => model.sigma.powi(2),
            };
            let r1 = model.curve.derivative(model.d0);
            if r1 == 0.0 {
                return Err(Error::FlatCurve);
            }
            (4.0 * var * h / (psi0 * r1 * r1 * n2)).cbrt()
        }
        Problem::Mode => {
            if !is_cusp(model) {
                return Err(Error::CuspRequired);
            }
            if cfg.second_stage_design != SecondStageDesign::Uniform {
                return Err(Error::invalid(
                    "the mode limit law is stated for a uniform zoom design",
                ));
            }
            let edge = model.d0 + cfg.b * (n1 as f64).powf(-cfg.gamma);
            let m = model.eval_mean(edge, cfg.n);
            let eps = 1e-7;
            let dm = (model.eval_mean(edge + eps, cfg.n) - model.eval_mean(edge - eps, cfg.n)) / (2.0 * eps);
            (4.0 * h * (m * m + model.sigma.powi(2)) / (dm * dm * n2)).cbrt()
        }
    };
    if !(scale > 0.0 && scale.is_finite()) {
        return Err(Error::DegenerateLimit);
    }
    Ok(scale)
}

impl Harness {
    /// KS distance between standardized second-stage errors and the limit law.
    pub fn dist_check(
        &self,
        model: &ModelSpec,
        cfg: &TwoStageConfig,
        reps: usize,
        oracle_draws: usize,
        scale_multiplier: f64,
        grid: &PathGrid,
    ) -> Result<DistCheckReport> {
        if reps < 1000 || oracle_draws < 1000 {
            return Err(Error::invalid("dist_check needs reps and oracle_draws ≥ 1000"));
        }
        cfg.check(model)?;
        if cfg.practical_quantile.is_some() {
            return Err(Error::invalid("dist_check uses the K·n₁^{−γ} window"));
        }
        let (n1, _) = cfg.split();
        let h = cfg.k * (n1 as f64).powf(-cfg.gamma);
        let scale = finite_n_scale(model, cfg, h)? * scale_multiplier;
        let id = format!("dist/{}/n={}", cfg.problem, cfg.n);
        let scaled = self.replicate(reps, |rep| {
            let r = run_two_stage(model, cfg, &mut self.stream(&id, rep))?;
            Ok((r.d2_hat - model.d0) / scale)
        })?;
        let drift = DriftSpec::for_problem(cfg.problem);
        let oracle = self
            .pool
            .install(|| limit_sample(&drift, grid, oracle_draws, self.seed, &format!("dist-oracle/{}", cfg.problem)))?;
        Ok(DistCheckReport {
            n: cfg.n,
            reps,
            ks_stat: ks_two_sample(&scaled, &oracle),
            scale_used: scale,
            scale_multiplier,
            oracle_draws,
            drift,
        })
    }

    /// Draws of a normalized limit law.
    pub fn limit_draws(&self, drift: &DriftSpec, grid: &PathGrid, draws: usize) -> Result<Vec<f64>> {
        self.pool
            .install(|| limit_sample(drift, grid, draws, self.seed, "limits"))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RiskReport {
    pub n_grid: Vec<u64>,
    pub reps: usize,
    pub two_stage_excess: Vec<f64>,
    pub one_stage_excess: Vec<f64>,
    pub two_stage_slope: f64,
    pub one_stage_slope: f64,
    pub two_stage_target: f64,
    pub one_stage_target: f64,
    /// Smallest `n` from which the two-stage risk stays below the one-stage risk.
    pub crossover_n: Option<u64>,
    /// Smallest single-replication excess risk seen (must be ≥ 0).
    pub min_excess: f64,
}

impl Harness {
    /// Mean excess misclassification risk of the two-stage classifier
    /// against a one-stage classifier on an oracle design peaked at `d₀`.
    pub fn excess_risk_experiment(
        &self,
        model: &ModelSpec,
        cfg: &TwoStageConfig,
        n_grid: &[u64],
        reps: usize,
        oracle_density: SymmetricDensity,
    ) -> Result<RiskReport> {
        check_grid(n_grid, 3)?;
        if model.kind != ModelKind::BinaryMonotone {
            return Err(Error::Mismatch("excess risk needs a binary model".into()));
        }
        let curve = model.curve;
        let bayes = risk_uniform(&curve, model.d0);
        let oracle = DesignSpec::SymmetricZoom {
            center: model.d0,
            halfwidth: model.d0.min(1.0 - model.d0),
            density: oracle_density,
        };
        let mut two = Vec::new();
        let mut one = Vec::new();
        let mut min_excess = f64::INFINITY;
        for &n in n_grid {
            let id = format!("risk/n={n}");
            let pairs = self.replicate(reps, |rep| {
                let mut rng = self.stream(&id, rep);
                let a = run_two_stage(model, &TwoStageConfig { n, ..*cfg }, &mut rng)?;
                let b = run_one_stage(model, n, &oracle, &mut rng)?;
                Ok((
                    risk_uniform(&curve, a.d2_hat) - bayes,
                    risk_uniform(&curve, b.d2_hat) - bayes,
                ))
            })?;
            for &(a, b) in &pairs {
                min_excess = min_excess.min(a).min(b);
            }
            two.push(mean(&pairs.iter().map(|p| p.0).collect::<Vec<_>>()));
            one.push(mean(&pairs.iter().map(|p| p.1).collect::<Vec<_>>()));
        }
        let crossover_n = (0..n_grid.len())
            .find(|&i| (i..n_grid.len()).all(|j| two[j] < one[j]))
            .map(|i| n_grid[i]);
        Ok(RiskReport {
            n_grid: n_grid.to_vec(),
            reps,
            two_stage_slope: slope_of(n_grid, &two).slope,
            one_stage_slope: slope_of(n_grid, &one).slope,
            two_stage_target: -2.0 * (1.0 + cfg.gamma) / 3.0,
            one_stage_target: -2.0 / 3.0,
            two_stage_excess: two,
            one_stage_excess: one,
            crossover_n,
            min_excess,
        })
    }
}

/// Parameters of the local change-point process experiment.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Prop33Params {
    pub h: f64,
    pub sigma: f64,
    pub p: f64,
    pub gamma: f64,
    pub xi: f64,
    #[serde(rename = "K")]
    pub k: f64,
    pub c0: f64,
    pub d0: f64,
}

impl Default for Prop33Params {
    fn default() -> Self {
        Prop33Params {
            h: 1.0,
            sigma: 1.0,
            p: 0.5,
            gamma: 0.2,
            xi: 0.25,
            k: 1.0,
            c0: 1.0,
            d0: 0.5,
        }
    }
}

impl Prop33Params {
    /// `σ² p^γ (1−p)^{1−2ξ} |h| / K`
    pub fn pi0_sq(&self) -> f64 {
        self.sigma.powi(2) * self.p.powf(self.gamma) * (1.0 - self.p).powf(1.0 - 2.0 * self.xi) * self.h.abs()
            / self.k
    }

    /// Exact variance at budget `n`, including the jump's own contribution.
    pub fn finite_n_variance(&self, n: u64) -> f64 {
        let jump = self.c0 * (n as f64).powf(-self.xi);
        self.pi0_sq() * (1.0 + jump * jump / (4.0 * self.sigma.powi(2)))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Prop33Report {
    pub params: Prop33Params,
    pub n_grid: Vec<u64>,
    pub reps: usize,
    pub variance: Vec<f64>,
    pub skewness: Vec<f64>,
    pub pi0_sq: f64,
    pub finite_n_variance: Vec<f64>,
}

impl Harness {
    /// Variance of `T = Z(h, α, β, d̂₁) − Z(h, α, β, d₀)` where `Z` is the
    /// local second-stage change-point process.
    ///
    /// `d̂₁` is the stage-one joint fit; both terms reuse the same design
    /// offsets and noise.
    pub fn prop33_experiment(&self, params: &Prop33Params, n_grid: &[u64], reps: usize) -> Result<Prop33Report> {
        let pr = *params;
        let model = ModelSpec::changepoint(pr.d0, 0.0, pr.c0, pr.xi, pr.sigma);
        model.validate()?;
        let mut variances = Vec::new();
        let mut skews = Vec::new();
        for &n in n_grid {
            let cfg = TwoStageConfig {
                p: pr.p,
                gamma: pr.gamma,
                k: pr.k,
                ..TwoStageConfig::default_for(Problem::ChangePoint, n)
            };
            cfg.check(&model)?;
            let (n1, n2) = cfg.split();
            let eta = 1.0 + pr.gamma - 2.0 * pr.xi;
            let delta = pr.h * (n as f64).powf(-eta);
            let half = pr.k * (n1 as f64).powf(-pr.gamma);
            let (alpha, beta) = (0.0, model.jump(n));
            let mid = 0.5 * (alpha + beta);
            let norm = (n2 as f64).powf(-pr.xi);
            let id = format!("prop33/n={n}");
            let ts = self.replicate(reps, |rep| {
                let mut rng = self.stream(&id, rep);
                let s1 = sample_batch(&model, &DesignSpec::unit(), n1 as usize, n, 1, &mut rng)?;
                let d1 = crate::estimators::fit_changepoint_joint(&s1)?.d_hat;
                let local = |x: f64| {
                    let (lo, hi) = if delta >= 0.0 {
                        (pr.d0, pr.d0 + delta)
                    } else {
                        (pr.d0 + delta, pr.d0)
                    };
                    let inside = x > lo && x <= hi;
                    let sign = if delta >= 0.0 { 1.0 } else { -1.0 };
                    if inside { sign } else { 0.0 }
                };
                let mut t = 0.0;
                for _ in 0..n2 {
                    let u: f64 = 2.0 * rand::Rng::random::<f64>(&mut rng) - 1.0;
                    let e: f64 = pr.sigma * rand::Rng::sample::<f64, _>(&mut rng, rand_distr::StandardNormal);
                    let x_hat = d1 + u * half;
                    let x_0 = pr.d0 + u * half;
                    let term = |x: f64| {
                        let w = local(x);
                        if w == 0.0 {
                            0.0
                        } else {
                            w * (model.eval_mean(x, n) + e - mid)
                        }
                    };
                    t += term(x_hat) - term(x_0);
                }
                Ok(norm * t)
            })?;
            variances.push(if ts.iter().all(|&t| t == 0.0) { 0.0 } else { variance(&ts) });
            skews.push(if ts.iter().all(|&t| t == 0.0) { 0.0 } else { skewness(&ts) });
        }
        Ok(Prop33Report {
            params: pr,
            n_grid: n_grid.to_vec(),
            reps,
            variance: variances,
            skewness: skews,
            pi0_sq: pr.pi0_sq(),
            finite_n_variance: n_grid.iter().map(|&n| pr.finite_n_variance(n)).collect(),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AsymmetryReport {
    pub a1: f64,
    pub a2: f64,
    pub b: f64,
    pub d0: f64,
    pub d_star: f64,
    pub n_grid: Vec<u64>,
    pub reps: usize,
    pub mean_d1: Vec<f64>,
}

/// `d* = d₀ + (a₁ − a₂)b/(a₁ + a₂)`, the population maximiser of the
/// binned criterion under `m(x) = e^{−a₁|x−d₀|}` left and `e^{−a₂|x−d₀|}` right.
pub fn asymmetric_target(d0: f64, a1: f64, a2: f64, b: f64) -> f64 {
    d0 + (a1 - a2) * b / (a1 + a2)
}

impl Harness {
    /// Mean one-stage shorth estimate under an asymmetric peak.
    pub fn asymmetry_bias_experiment(
        &self,
        model: &ModelSpec,
        n_grid: &[u64],
        reps: usize,
    ) -> Result<AsymmetryReport> {
        let Some((a1, a2)) = model.asym else {
            return Err(Error::invalid("model has no asymmetry rates"));
        };
        let b = model.bin_width;
        if !(model.d0 - b > 0.0 && model.d0 + b < 1.0) {
            return Err(Error::invalid("[d0 − b, d0 + b] must lie inside (0,1)"));
        }
        let mut means = Vec::new();
        for &n in n_grid {
            let id = format!("asymmetry/n={n}");
            let d = self.replicate(reps, |rep| {
                run_one_stage(model, n, &DesignSpec::unit(), &mut self.stream(&id, rep)).map(|r| r.d1_hat)
            })?;
            means.push(mean(&d));
        }
        Ok(AsymmetryReport {
            a1,
            a2,
            b,
            d0: model.d0,
            d_star: asymmetric_target(model.d0, a1, a2, b),
            n_grid: n_grid.to_vec(),
            reps,
            mean_d1: means,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScaleFactorReport {
    pub n: u64,
    pub reps: usize,
    pub p: f64,
    pub two_stage_variance: f64,
    pub one_stage_variance: f64,
    /// `Var(d̂₂) / Var(one-stage estimate on n points)`.
    pub variance_ratio: f64,
    /// `p^{−2/3}`, the squared limiting scale factor.
    pub target_ratio: f64,
    /// Correlation between the stage-one and stage-two errors.
    pub stage_correlation: f64,
}

impl Harness {
    /// Compare two-stage and one-stage variances at the same total budget.
    pub fn scale_factor_experiment(
        &self,
        model: &ModelSpec,
        cfg: &TwoStageConfig,
        reps: usize,
    ) -> Result<ScaleFactorReport> {
        let id = format!("scale-factor/{}/n={}", cfg.problem, cfg.n);
        let runs = self.replicate(reps, |rep| {
            let mut rng = self.stream(&id, rep);
            let two = run_two_stage(model, cfg, &mut rng)?;
            let one = run_one_stage(model, cfg.n, &DesignSpec::unit(), &mut rng)?;
            Ok((two.d1_hat - model.d0, two.d2_hat - model.d0, one.d1_hat - model.d0))
        })?;
        let e1: Vec<f64> = runs.iter().map(|r| r.0).collect();
        let e2: Vec<f64> = runs.iter().map(|r| r.1).collect();
        let e0: Vec<f64> = runs.iter().map(|r| r.2).collect();
        let (v1, v2, v0) = (variance(&e1), variance(&e2), variance(&e0));
        let (m1, m2) = (mean(&e1), mean(&e2));
        let cov = e1.iter().zip(&e2).map(|(a, b)| (a - m1) * (b - m2)).sum::<f64>() / (reps as f64 - 1.0);
        Ok(ScaleFactorReport {
            n: cfg.n,
            reps,
            p: cfg.p,
            two_stage_variance: v2,
            one_stage_variance: v0,
            variance_ratio: v2 / v0,
            target_ratio: cfg.p.powf(-2.0 / 3.0),
            stage_correlation: cov / (v1 * v2).sqrt(),
        })
    }

    /// Two-stage replications at `cfg.n`.
    pub fn simulate(&self, model: &ModelSpec, cfg: &TwoStageConfig, reps: usize) -> Result<Vec<ReplicationRow>> {
        let id = format!("simulate/{}/n={}", cfg.problem, cfg.n);
        let recs = self.replicate(reps, |rep| run_two_stage(model, cfg, &mut self.stream(&id, rep)))?;
        Ok(recs.iter().enumerate().map(|(i, r)| self.row(cfg.n, i as u64, r)).collect())
    }
}
