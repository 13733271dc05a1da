//! Limit laws of the second-stage estimators and their scaling constants.
//!
//! All four limits are extremizers of a two-sided Brownian motion plus a
//! deterministic drift, so one simulator with a drift descriptor covers them:
//!
//! | law                           | drift            | sense |
//! |-------------------------------|------------------|-------|
//! | change-point                  | `B(v) + \|v\|`   | min   |
//! | inverse isotonic / classifier | `B(w) + w²`      | min   |
//! | mode                          | `B(h) − h²`      | max   |

use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::seeding::derive_stream;
use crate::two_stage::Problem;
use crate::{Error, Result};

/// Discretisation of `[−range, range]` with spacing `step`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PathGrid {
    pub step: f64,
    pub range: f64,
}

impl Default for PathGrid {
    fn default() -> Self {
        PathGrid {
            step: 1e-3,
            range: 8.0,
        }
    }
}

impl PathGrid {
    /// Number of grid points on each side of the origin.
    pub fn points_per_side(&self) -> Result<usize> {
        if !(self.step > 0.0 && self.range > 0.0) {
            return Err(Error::invalid("grid step and range must be > 0"));
        }
        let ratio = self.range / self.step;
        let m = ratio.round();
        if (ratio - m).abs() > 1e-6 * ratio || m < 10.0 {
            return Err(Error::invalid(format!(
                "range/step = {ratio} must be an integer ≥ 10"
            )));
        }
        Ok(m as usize)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DriftShape {
    /// `h ↦ c·|h|`
    AbsSlope(f64),
    /// `h ↦ c·h²`
    Quadratic(f64),
}

impl DriftShape {
    fn coefficient(&self) -> f64 {
        match *self {
            DriftShape::AbsSlope(c) | DriftShape::Quadratic(c) => c,
        }
    }

    fn eval(&self, h: f64) -> f64 {
        match *self {
            DriftShape::AbsSlope(c) => c * h.abs(),
            DriftShape::Quadratic(c) => c * h * h,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Extremum {
    Min,
    Max,
}

/// `argmin{a·B(h) + drift(h)}` or `argmax{a·B(h) − drift(h)}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DriftSpec {
    pub shape: DriftShape,
    pub sense: Extremum,
    pub diffusion: f64,
}

impl DriftSpec {
    /// `argmin_v {B(v) + |v|}`
    pub fn abs_min() -> Self {
        DriftSpec {
            shape: DriftShape::AbsSlope(1.0),
            sense: Extremum::Min,
            diffusion: 1.0,
        }
    }

    /// `argmin_w {B(w) + w²}`
    pub fn chernoff_min() -> Self {
        DriftSpec {
            shape: DriftShape::Quadratic(1.0),
            sense: Extremum::Min,
            diffusion: 1.0,
        }
    }

    /// `argmax_h {B(h) − h²}`
    pub fn chernoff_max() -> Self {
        DriftSpec {
            sense: Extremum::Max,
            ..Self::chernoff_min()
        }
    }

    /// Normalized law of the second-stage estimator for `problem`.
    pub fn for_problem(problem: Problem) -> Self {
        match problem {
            Problem::ChangePoint => Self::abs_min(),
            Problem::InverseIsotonic | Problem::Classification => Self::chernoff_min(),
            Problem::Mode => Self::chernoff_max(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.shape.coefficient() > 0.0 && self.diffusion > 0.0) {
            return Err(Error::invalid("drift coefficient and diffusion must be > 0"));
        }
        Ok(())
    }

    /// `λ` such that the extremizer of `a·B + c·φ` equals `λ` times the
    /// extremizer of `B + φ` in law: `(a/c)²` for `|h|`, `(a/c)^{2/3}` for `h²`.
    pub fn rescaling_factor(&self) -> f64 {
        let ratio = self.diffusion / self.shape.coefficient();
        match self.shape {
            DriftShape::AbsSlope(_) => ratio * ratio,
            DriftShape::Quadratic(_) => ratio.powf(2.0 / 3.0),
        }
    }

    /// The same drift family with unit coefficient and diffusion.
    pub fn normalized(&self) -> Self {
        let shape = match self.shape {
            DriftShape::AbsSlope(_) => DriftShape::AbsSlope(1.0),
            DriftShape::Quadratic(_) => DriftShape::Quadratic(1.0),
        };
        DriftSpec {
            shape,
            sense: self.sense,
            diffusion: 1.0,
        }
    }
}

/// One simulated extremizer and whether it sits on the edge of the grid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExtremumDraw {
    pub location: f64,
    pub truncated: bool,
}

/// Simulate one path on the grid and return its extremizer.
pub fn draw_extremum<R: Rng + ?Sized>(
    drift: &DriftSpec,
    grid: &PathGrid,
    rng: &mut R,
) -> Result<ExtremumDraw> {
    let m = grid.points_per_side()?;
    drift.validate()?;
    let sd = drift.diffusion * grid.step.sqrt();
    let sign = match drift.sense {
        Extremum::Min => 1.0,
        Extremum::Max => -1.0,
    };
    // Minimise sign·(a·B) + φ; for Max this is −(a·B − φ).
    let mut best_val = 0.0;
    let mut best_idx: i64 = 0;
    for side in [-1i64, 1] {
        let mut b = 0.0;
        for i in 1..=m as i64 {
            b += sd * rng.sample::<f64, _>(StandardNormal);
            let h = (side * i) as f64 * grid.step;
            let v = sign * b + drift.shape.eval(h);
            let idx = side * i;
            if v < best_val || (v == best_val && idx < best_idx) {
                best_val = v;
                best_idx = idx;
            }
        }
    }
    Ok(ExtremumDraw {
        location: best_idx as f64 * grid.step,
        truncated: best_idx.unsigned_abs() as usize == m,
    })
}

/// Location of the extremum of `a·B(h) ± drift(h)` on the grid (smallest on ties).
pub fn argext_two_sided_bm<R: Rng + ?Sized>(
    drift: &DriftSpec,
    grid: &PathGrid,
    rng: &mut R,
) -> Result<f64> {
    draw_extremum(drift, grid, rng).map(|d| d.location)
}

/// `draws` independent extremizers, one stream per draw.
///
/// Fails when 0.1% or more of the extrema land on the edge of the grid.
pub fn limit_sample(
    drift: &DriftSpec,
    grid: &PathGrid,
    draws: usize,
    seed: u64,
    experiment_id: &str,
) -> Result<Vec<f64>> {
    let out: Vec<ExtremumDraw> = (0..draws)
        .into_par_iter()
        .map(|i| {
            let mut rng = derive_stream(seed, experiment_id, i as u64);
            draw_extremum(drift, grid, &mut rng)
        })
        .collect::<Result<_>>()?;
    let truncated = out.iter().filter(|d| d.truncated).count();
    if truncated as f64 >= 1e-3 * draws as f64 {
        return Err(Error::Truncation {
            truncated,
            draws,
            range: grid.range,
        });
    }
    Ok(out.into_iter().map(|d| d.location).collect())
}

/// `λ₀ = 8Kσ² / (c₀²(1−p)p^γ)`, divided by `2ψ(0)` for a non-uniform
/// second-stage design with density `ψ` on `[−1, 1]`.
pub fn changepoint_scale(k: f64, sigma: f64, c0: f64, p: f64, gamma: f64, psi0: Option<f64>) -> f64 {
    let lambda = 8.0 * k * sigma * sigma / (c0 * c0 * (1.0 - p) * p.powf(gamma));
    match psi0 {
        Some(psi) => lambda / (2.0 * psi),
        None => lambda,
    }
}

/// `(8σ²K / (r′(d₀)² p^γ (1−p)))^{1/3}`.
pub fn isotonic_scale(k: f64, sigma: f64, r_prime_d0: f64, p: f64, gamma: f64) -> Result<f64> {
    if r_prime_d0 == 0.0 {
        return Err(Error::FlatCurve);
    }
    Ok((8.0 * sigma * sigma * k / (r_prime_d0 * r_prime_d0 * p.powf(gamma) * (1.0 - p))).cbrt())
}

/// [`isotonic_scale`] with `σ²` replaced by `Var(Y | X = d₀) = r(d₀)(1 − r(d₀))`.
pub fn classification_scale(k: f64, r_d0: f64, r_prime_d0: f64, p: f64, gamma: f64) -> Result<f64> {
    isotonic_scale(k, (r_d0 * (1.0 - r_d0)).sqrt(), r_prime_d0, p, gamma)
}

/// Regression-function values that enter the mode-estimation constants.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModeProfile {
    pub m_d0: f64,
    pub m_d0_plus_b: f64,
    /// Right derivative at the mode, `m′(d₀+)`.
    pub m_prime_d0_plus: f64,
    pub m_prime_d0_plus_b: f64,
    pub sigma: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModeScales {
    /// `√(2(m²(d₀+b) + σ²))`
    pub a: f64,
    /// `−m′(d₀+b)`
    pub c: f64,
    /// `(4K(m²(d₀)+σ²) / (m′(d₀+)² p^γ (1−p)))^{1/3}`
    pub two_stage_constant: f64,
}

impl ModeScales {
    /// Scale of the one-stage limit, `(a/c)^{2/3}`.
    pub fn one_stage_constant(&self) -> f64 {
        (self.a / self.c).powf(2.0 / 3.0)
    }
}

pub fn mode_scales(k: f64, profile: &ModeProfile, p: f64, gamma: f64) -> Result<ModeScales> {
    if profile.m_prime_d0_plus == 0.0 {
        return Err(Error::CuspRequired);
    }
    let s2 = profile.sigma * profile.sigma;
    let a = (2.0 * (profile.m_d0_plus_b.powi(2) + s2)).sqrt();
    let c = -profile.m_prime_d0_plus_b;
    let two_stage_constant = (4.0 * k * (profile.m_d0.powi(2) + s2)
        / (profile.m_prime_d0_plus.powi(2) * p.powf(gamma) * (1.0 - p)))
        .cbrt();
    Ok(ModeScales {
        a,
        c,
        two_stage_constant,
    })
}

/// Stage-one fraction minimising the limiting variance of `d̂₂` when the
/// zoom window follows the stage-one rate.
pub fn optimal_p(problem: Problem, xi: Option<f64>) -> Result<f64> {
    match problem {
        Problem::ChangePoint => {
            let xi = xi.unwrap_or(0.0);
            if !(0.0..0.5).contains(&xi) {
                return Err(Error::invalid("xi must lie in [0, 1/2)"));
            }
            Ok((1.0 - 2.0 * xi) / (2.0 * (1.0 - xi)))
        }
        Problem::InverseIsotonic | Problem::Classification | Problem::Mode => Ok(0.25),
    }
}

/// Order-statistic quantile with linear interpolation between neighbours.
pub fn empirical_quantile(samples: &[f64], q: f64) -> Result<f64> {
    if samples.is_empty() {
        return Err(Error::invalid("empty sample"));
    }
    if !(q > 0.0 && q < 1.0) {
        return Err(Error::invalid("quantile level must lie in (0,1)"));
    }
    let mut s = samples.to_vec();
    s.sort_by(f64::total_cmp);
    let h = (s.len() - 1) as f64 * q;
    let lo = h.floor() as usize;
    let hi = (lo + 1).min(s.len() - 1);
    Ok(s[lo] + (h - lo as f64) * (s[hi] - s[lo]))
}
