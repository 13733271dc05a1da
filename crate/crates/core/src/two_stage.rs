//! Two-stage orchestration and one-stage baselines.

use std::fmt;
use std::str::FromStr;
use std::time::{Duration, Instant};

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::estimators::{
    fit_changepoint_joint, fit_changepoint_plugin, isotonic_fit, isotonic_inverse, shorth_mode,
};
use crate::model::{
    sample_batch, second_stage_interval, CurveSpec, DesignSpec, ModelKind, ModelSpec,
    SymmetricDensity, Window,
};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Problem {
    #[serde(rename = "changepoint")]
    ChangePoint,
    InverseIsotonic,
    Classification,
    Mode,
}

impl Problem {
    pub const ALL: [Problem; 4] = [
        Problem::ChangePoint,
        Problem::InverseIsotonic,
        Problem::Classification,
        Problem::Mode,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Problem::ChangePoint => "changepoint",
            Problem::InverseIsotonic => "inverse_isotonic",
            Problem::Classification => "classification",
            Problem::Mode => "mode",
        }
    }

    /// Model kind the problem is posed on.
    pub fn model_kind(&self) -> ModelKind {
        match self {
            Problem::ChangePoint => ModelKind::ChangePoint,
            Problem::InverseIsotonic => ModelKind::Monotone,
            Problem::Classification => ModelKind::BinaryMonotone,
            Problem::Mode => ModelKind::Unimodal,
        }
    }

    pub fn for_model(kind: ModelKind) -> Problem {
        match kind {
            ModelKind::ChangePoint => Problem::ChangePoint,
            ModelKind::Monotone => Problem::InverseIsotonic,
            ModelKind::BinaryMonotone => Problem::Classification,
            ModelKind::Unimodal => Problem::Mode,
        }
    }

    /// Exponent `ν` of the stage-one rate `n₁^{−ν}`.
    pub fn stage_one_rate(&self, xi: f64) -> f64 {
        match self {
            Problem::ChangePoint => 1.0 - 2.0 * xi,
            _ => 1.0 / 3.0,
        }
    }
}

impl fmt::Display for Problem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Problem {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.replace('-', "_").as_str() {
            "changepoint" | "change_point" => Ok(Problem::ChangePoint),
            "inverse_isotonic" | "isotonic" => Ok(Problem::InverseIsotonic),
            "classification" => Ok(Problem::Classification),
            "mode" => Ok(Problem::Mode),
            other => Err(Error::invalid(format!("unknown problem '{other}'"))),
        }
    }
}

/// Covariate design inside the zoomed-in window.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum SecondStageDesign {
    #[default]
    Uniform,
    Symmetric { density: SymmetricDensity },
}

impl SecondStageDesign {
    fn zoom(&self, center: f64, halfwidth: f64) -> DesignSpec {
        match *self {
            SecondStageDesign::Uniform => DesignSpec::UniformZoom { center, halfwidth },
            SecondStageDesign::Symmetric { density } => DesignSpec::SymmetricZoom {
                center,
                halfwidth,
                density,
            },
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TwoStageConfig {
    pub problem: Problem,
    /// Total budget.
    pub n: u64,
    /// Stage-one fraction.
    pub p: f64,
    /// Zoom exponent.
    pub gamma: f64,
    /// Half-width scale `K`.
    #[serde(rename = "K")]
    pub k: f64,
    /// Mode bin half-width.
    pub b: f64,
    pub seed: u64,
    #[serde(default)]
    pub second_stage_design: SecondStageDesign,
    /// When set, the half-width is `quantile / n₁^ν` instead of `K·n₁^{−γ}`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub practical_quantile: Option<f64>,
}

impl TwoStageConfig {
    pub fn default_for(problem: Problem, n: u64) -> Self {
        let (p, gamma, k) = match problem {
            Problem::ChangePoint => (1.0 / 3.0, 0.3, 2.0),
            Problem::InverseIsotonic | Problem::Classification => (0.25, 0.2, 1.0),
            Problem::Mode => (0.25, 0.25, 1.0),
        };
        TwoStageConfig {
            problem,
            n,
            p,
            gamma,
            k,
            b: 0.1,
            seed: 0,
            second_stage_design: SecondStageDesign::Uniform,
            practical_quantile: None,
        }
    }

    /// `(n₁, n₂)` with `n₁ = round(p·n)`.
    pub fn split(&self) -> (u64, u64) {
        let n1 = (self.p * self.n as f64).round() as u64;
        (n1, self.n - n1.min(self.n))
    }

    /// Check the configuration against the model it will run on.
    pub fn check(&self, model: &ModelSpec) -> Result<()> {
        model.validate()?;
        if model.kind != self.problem.model_kind() {
            return Err(Error::Mismatch(format!(
                "problem {} needs a {:?} model, got {:?}",
                self.problem,
                self.problem.model_kind(),
                model.kind
            )));
        }
        if !(self.p > 0.0 && self.p < 1.0) {
            return Err(Error::invalid("p must lie in (0,1)"));
        }
        if !(self.gamma > 0.0 && self.k > 0.0 && self.b > 0.0) {
            return Err(Error::invalid("γ, K and b must be > 0"));
        }
        if let Some(q) = self.practical_quantile {
            if !(q > 0.0) {
                return Err(Error::invalid("practical quantile must be > 0"));
            }
        }
        match self.problem {
            Problem::ChangePoint => {
                if !(self.gamma < 1.0 - 2.0 * model.xi) {
                    return Err(Error::Gate("γ < 1−2ξ".into()));
                }
            }
            Problem::InverseIsotonic | Problem::Classification => {
                if !(self.gamma < 1.0 / 3.0) {
                    return Err(Error::Gate("γ < 1/3".into()));
                }
            }
            Problem::Mode => {
                if !(self.gamma < 1.0 / 3.0) {
                    return Err(Error::Gate("γ < 1/3".into()));
                }
                if !(self.k > self.b) {
                    return Err(Error::Gate("K > b".into()));
                }
                if !(2.0 * self.b < 1.0) {
                    return Err(Error::invalid("stage-one search [b, 1−b] is empty"));
                }
            }
        }
        let (n1, n2) = self.split();
        if n1 < 2 || n2 < 2 {
            return Err(Error::NoAdmissibleSplit);
        }
        Ok(())
    }
}

/// Outcome of one two-stage (or one-stage) run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EstimateRecord {
    pub d1_hat: f64,
    pub d2_hat: f64,
    pub alpha_hat: Option<f64>,
    pub beta_hat: Option<f64>,
    pub n1: u64,
    pub n2: u64,
    /// Second-stage window (the design support for one-stage runs).
    pub window: Window,
    pub clip_flag: bool,
    pub vacuous_flag: bool,
    #[serde(skip)]
    pub wall_time: Duration,
}

/// Stage-one estimate on a batch drawn from `design`.
struct StageOne {
    d_hat: f64,
    alpha_hat: Option<f64>,
    beta_hat: Option<f64>,
    vacuous: bool,
}

fn stage_one<R: Rng + ?Sized>(
    model: &ModelSpec,
    design: &DesignSpec,
    count: u64,
    n_budget: u64,
    bin: f64,
    rng: &mut R,
) -> Result<StageOne> {
    let batch = sample_batch(model, design, count as usize, n_budget, 1, rng)?;
    let support = design.support()?;
    Ok(match model.kind {
        ModelKind::ChangePoint => {
            let fit = fit_changepoint_joint(&batch)?;
            StageOne {
                d_hat: fit.d_hat,
                alpha_hat: Some(fit.alpha_hat),
                beta_hat: Some(fit.beta_hat),
                vacuous: false,
            }
        }
        ModelKind::Monotone | ModelKind::BinaryMonotone => {
            let fit = isotonic_fit(&batch, &support)?;
            StageOne {
                d_hat: isotonic_inverse(&fit, model.t0),
                alpha_hat: None,
                beta_hat: None,
                vacuous: false,
            }
        }
        ModelKind::Unimodal => {
            let search = Window::new(support.lo + bin, support.hi - bin);
            if !(search.hi >= search.lo) {
                return Err(Error::BinExceedsHalfwidth {
                    k: 0.5 * support.width(),
                    b: bin,
                });
            }
            let fit = shorth_mode(&batch, bin, &search)?;
            StageOne {
                d_hat: fit.d_hat,
                alpha_hat: None,
                beta_hat: None,
                vacuous: fit.vacuous,
            }
        }
    })
}

/// Zoom half-width: `quantile / n₁^ν` under the practical rule, else `K·n₁^{−γ}`.
pub fn practical_halfwidth(problem: Problem, xi: f64, n1: u64, tau: f64, limit_quantile: f64) -> f64 {
    debug_assert!(tau > 0.0 && tau < 1.0);
    limit_quantile / (n1 as f64).powf(problem.stage_one_rate(xi))
}

/// Split the budget, estimate globally, zoom in and estimate again.
pub fn run_two_stage<R: Rng + ?Sized>(
    model: &ModelSpec,
    cfg: &TwoStageConfig,
    rng: &mut R,
) -> Result<EstimateRecord> {
    let start = Instant::now();
    cfg.check(model)?;
    let (n1, n2) = cfg.split();
    let s1 = stage_one(model, &DesignSpec::unit(), n1, cfg.n, cfg.b, rng)?;
    let d1 = s1.d_hat;

    let (window, halfwidth) = match cfg.practical_quantile {
        None => (
            second_stage_interval(d1, cfg.k, cfg.gamma, n1, None)?,
            cfg.k * (n1 as f64).powf(-cfg.gamma),
        ),
        Some(q) => {
            let h = practical_halfwidth(cfg.problem, model.xi, n1, 0.05, q);
            (Window::clipped_to_unit(d1 - h, d1 + h), h)
        }
    };
    let design = cfg.second_stage_design.zoom(d1, halfwidth);
    let s2 = sample_batch(model, &design, n2 as usize, cfg.n, 2, rng)?;

    let (d2, vacuous) = match cfg.problem {
        Problem::ChangePoint => {
            let (a, b) = (s1.alpha_hat.unwrap(), s1.beta_hat.unwrap());
            let fit = fit_changepoint_plugin(&s2, a, b, &window)?;
            (fit.d_hat, fit.vacuous)
        }
        Problem::InverseIsotonic | Problem::Classification => {
            let fit = isotonic_fit(&s2, &window)?;
            (isotonic_inverse(&fit, model.t0), false)
        }
        Problem::Mode => {
            let bin = cfg.b / cfg.k * halfwidth;
            let search = match cfg.practical_quantile {
                None => second_stage_interval(d1, cfg.k, cfg.gamma, n1, Some(cfg.b))?,
                Some(_) => {
                    let h = halfwidth - bin;
                    Window::clipped_to_unit(d1 - h, d1 + h)
                }
            };
            let fit = shorth_mode(&s2, bin, &search)?;
            (fit.d_hat, fit.vacuous)
        }
    };
    Ok(EstimateRecord {
        d1_hat: d1,
        d2_hat: d2,
        alpha_hat: s1.alpha_hat,
        beta_hat: s1.beta_hat,
        n1,
        n2,
        window,
        clip_flag: window.clipped,
        vacuous_flag: vacuous || s1.vacuous,
        wall_time: start.elapsed(),
    })
}

/// Run only the stage-one estimator on `n` points drawn from `design`.
///
/// The mode search uses `model.bin_width` and is kept a bin away from the
/// edges of the design support.
pub fn run_one_stage<R: Rng + ?Sized>(
    model: &ModelSpec,
    n: u64,
    design: &DesignSpec,
    rng: &mut R,
) -> Result<EstimateRecord> {
    let start = Instant::now();
    if n < 2 {
        return Err(Error::invalid("n must be ≥ 2"));
    }
    model.validate()?;
    let window = design.support()?;
    let s = stage_one(model, design, n, n, model.bin_width, rng)?;
    Ok(EstimateRecord {
        d1_hat: s.d_hat,
        d2_hat: s.d_hat,
        alpha_hat: s.alpha_hat,
        beta_hat: s.beta_hat,
        n1: n,
        n2: 0,
        window,
        clip_flag: window.clipped,
        vacuous_flag: s.vacuous,
        wall_time: start.elapsed(),
    })
}

impl ModelSpec {
    /// Default model for each problem.
    pub fn default_for(problem: Problem) -> ModelSpec {
        let line = CurveSpec::Linear {
            intercept: 0.0,
            slope: 1.0,
        };
        match problem {
            Problem::ChangePoint => ModelSpec::changepoint(0.5, 0.0, 1.0, 0.25, 0.25),
            Problem::InverseIsotonic => ModelSpec::monotone(line, 0.5, 0.5).unwrap(),
            Problem::Classification => ModelSpec::binary(line).unwrap(),
            Problem::Mode => ModelSpec::unimodal(CurveSpec::ExpCusp { rate: 1.0 }, 0.5, 0.25, 0.1),
        }
    }
}
