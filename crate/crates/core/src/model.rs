//! Generative models, sampling designs and exact risk functionals.

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::numerics::integrate;
use crate::{Error, Result};

/// Parametric curve families with closed-form value, derivative and
/// (for monotone families) inverse.
///
/// `Linear` and `Logistic` are regression functions `r(x)` on `[0, 1]`.
/// `ExpCusp` and `QuadraticCap` are radial profiles `m̃(t)`, `t ≥ 0`, of a
/// unimodal mean `m(x) = m̃(|x − d₀|)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case", deny_unknown_fields)]
pub enum CurveSpec {
    /// `r(x) = intercept + slope·x`
    Linear { intercept: f64, slope: f64 },
    /// `r(x) = 1 / (1 + exp(−(x − location)/scale))`
    Logistic { location: f64, scale: f64 },
    /// `m̃(t) = exp(−rate·t)`; cusp at the mode, `m̃′(0) = −rate`.
    ExpCusp { rate: f64 },
    /// `m̃(t) = 1 − curvature·t²`; smooth at the mode, `m̃′(0) = 0`.
    QuadraticCap { curvature: f64 },
}

impl CurveSpec {
    pub fn value(&self, x: f64) -> f64 {
        match *self {
            CurveSpec::Linear { intercept, slope } => intercept + slope * x,
            CurveSpec::Logistic { location, scale } => {
                1.0 / (1.0 + (-(x - location) / scale).exp())
            }
            CurveSpec::ExpCusp { rate } => (-rate * x).exp(),
            CurveSpec::QuadraticCap { curvature } => 1.0 - curvature * x * x,
        }
    }

    pub fn derivative(&self, x: f64) -> f64 {
        match *self {
            CurveSpec::Linear { slope, .. } => slope,
            CurveSpec::Logistic { scale, .. } => {
                let r = self.value(x);
                r * (1.0 - r) / scale
            }
            CurveSpec::ExpCusp { rate } => -rate * (-rate * x).exp(),
            CurveSpec::QuadraticCap { curvature } => -2.0 * curvature * x,
        }
    }

    /// Inverse of a strictly monotone regression family; `None` for radial
    /// profiles or when `y` is outside the range.
    pub fn inverse(&self, y: f64) -> Option<f64> {
        match *self {
            CurveSpec::Linear { intercept, slope } if slope != 0.0 => Some((y - intercept) / slope),
            CurveSpec::Logistic { location, scale } if y > 0.0 && y < 1.0 => {
                Some(location + scale * (y / (1.0 - y)).ln())
            }
            _ => None,
        }
    }

    /// True for the families used as monotone regression functions.
    pub fn is_regression_family(&self) -> bool {
        matches!(self, CurveSpec::Linear { .. } | CurveSpec::Logistic { .. })
    }

    /// `∫₀ᵃ r(x) dx` in closed form, when available.
    fn integral_from_zero(&self, a: f64) -> Option<f64> {
        match *self {
            CurveSpec::Linear { intercept, slope } => Some(intercept * a + 0.5 * slope * a * a),
            CurveSpec::Logistic { location, scale } => {
                Some(scale * (softplus((a - location) / scale) - softplus(-location / scale)))
            }
            _ => None,
        }
    }
}

fn softplus(z: f64) -> f64 {
    if z > 0.0 {
        z + (-z).exp().ln_1p()
    } else {
        z.exp().ln_1p()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelKind {
    ChangePoint,
    Monotone,
    BinaryMonotone,
    Unimodal,
}

/// Distribution of the additive errors. Only the first two moments matter
/// to the theory; `Uniform` is a robustness switch.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NoiseKind {
    #[default]
    Gaussian,
    Uniform,
}

fn default_c0() -> f64 {
    1.0
}
fn default_t0() -> f64 {
    0.5
}
fn default_bin() -> f64 {
    0.1
}
fn default_curve() -> CurveSpec {
    CurveSpec::Linear {
        intercept: 0.0,
        slope: 1.0,
    }
}

/// One of the four generative models with every parameter it needs.
///
/// Fields that a kind does not use are carried but ignored, so every model
/// serializes to the same JSON object shape.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSpec {
    pub kind: ModelKind,
    /// Change-point, threshold `r⁻¹(t₀)`, or mode.
    pub d0: f64,
    #[serde(default)]
    pub sigma: f64,
    /// Left level `α` of the change-point model.
    #[serde(default)]
    pub alpha_base: f64,
    /// Jump amplitude; the jump at budget `n` is `c0·n^{−xi}`.
    #[serde(default = "default_c0")]
    pub c0: f64,
    #[serde(default)]
    pub xi: f64,
    #[serde(default = "default_curve")]
    pub curve: CurveSpec,
    /// Inverse target level (`BinaryMonotone` uses 1/2).
    #[serde(default = "default_t0")]
    pub t0: f64,
    /// Asymmetric exponential peak `exp(−a1|x−d0|)` left, `exp(−a2|x−d0|)` right.
    #[serde(default)]
    pub asym: Option<(f64, f64)>,
    #[serde(default)]
    pub noise: NoiseKind,
    /// Bin half-width `b` used by the one-stage mode estimator.
    #[serde(default = "default_bin")]
    pub bin_width: f64,
}

impl ModelSpec {
    fn base(kind: ModelKind, d0: f64) -> Self {
        ModelSpec {
            kind,
            d0,
            sigma: 0.0,
            alpha_base: 0.0,
            c0: 1.0,
            xi: 0.0,
            curve: default_curve(),
            t0: 0.5,
            asym: None,
            noise: NoiseKind::Gaussian,
            bin_width: 0.1,
        }
    }

    pub fn changepoint(d0: f64, alpha: f64, c0: f64, xi: f64, sigma: f64) -> Self {
        ModelSpec {
            alpha_base: alpha,
            c0,
            xi,
            sigma,
            ..Self::base(ModelKind::ChangePoint, d0)
        }
    }

    /// Monotone regression `Y = r(X) + ε`; `d0 = r⁻¹(t0)`.
    pub fn monotone(curve: CurveSpec, t0: f64, sigma: f64) -> Result<Self> {
        let d0 = curve
            .inverse(t0)
            .ok_or_else(|| Error::invalid("curve has no inverse at t0"))?;
        let m = ModelSpec {
            curve,
            t0,
            sigma,
            ..Self::base(ModelKind::Monotone, d0)
        };
        m.validate()?;
        Ok(m)
    }

    /// Binary responses `Y ~ Bernoulli(r(X))`; `d0 = r⁻¹(1/2)`.
    pub fn binary(curve: CurveSpec) -> Result<Self> {
        let d0 = curve
            .inverse(0.5)
            .ok_or_else(|| Error::invalid("curve has no inverse at 1/2"))?;
        let m = ModelSpec {
            curve,
            t0: 0.5,
            ..Self::base(ModelKind::BinaryMonotone, d0)
        };
        m.validate()?;
        Ok(m)
    }

    /// Symmetric unimodal mean `m(x) = m̃(|x − d0|)`.
    pub fn unimodal(profile: CurveSpec, d0: f64, sigma: f64, bin_width: f64) -> Self {
        ModelSpec {
            curve: profile,
            sigma,
            bin_width,
            ..Self::base(ModelKind::Unimodal, d0)
        }
    }

    pub fn with_asymmetry(mut self, a1: f64, a2: f64) -> Self {
        self.asym = Some((a1, a2));
        self
    }

    pub fn with_noise(mut self, noise: NoiseKind) -> Self {
        self.noise = noise;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.d0 > 0.0 && self.d0 < 1.0) {
            return Err(Error::invalid(format!("d0 = {} outside (0,1)", self.d0)));
        }
        if !(self.sigma >= 0.0) {
            return Err(Error::invalid("sigma must be ≥ 0"));
        }
        match self.kind {
            ModelKind::ChangePoint => {
                if !(self.c0 > 0.0) {
                    return Err(Error::invalid("c0 must be > 0"));
                }
                if !(0.0..0.5).contains(&self.xi) {
                    return Err(Error::invalid("xi must lie in [0, 1/2)"));
                }
            }
            ModelKind::Monotone | ModelKind::BinaryMonotone => {
                let ok = match self.curve {
                    CurveSpec::Linear { slope, .. } => slope > 0.0,
                    CurveSpec::Logistic { scale, .. } => scale > 0.0,
                    _ => false,
                };
                if !ok {
                    return Err(Error::invalid("curve must be strictly increasing"));
                }
                if self.kind == ModelKind::BinaryMonotone {
                    let (lo, hi) = (self.curve.value(0.0), self.curve.value(1.0));
                    if lo < 0.0 || hi > 1.0 {
                        return Err(Error::invalid("binary curve must map [0,1] into [0,1]"));
                    }
                    if self.t0 != 0.5 {
                        return Err(Error::invalid("binary model uses t0 = 1/2"));
                    }
                }
                if (self.curve.value(self.d0) - self.t0).abs() > 1e-9 {
                    return Err(Error::invalid("d0 must equal r⁻¹(t0)"));
                }
            }
            ModelKind::Unimodal => {
                match self.asym {
                    Some((a1, a2)) if !(a1 > 0.0 && a2 > 0.0) => {
                        return Err(Error::invalid("asymmetry rates must be > 0"))
                    }
                    Some(_) => {}
                    None => {
                        let ok = match self.curve {
                            CurveSpec::ExpCusp { rate } => rate > 0.0,
                            CurveSpec::QuadraticCap { curvature } => curvature > 0.0,
                            _ => false,
                        };
                        if !ok {
                            return Err(Error::invalid("unimodal profile must be decreasing"));
                        }
                    }
                }
                if !(self.bin_width > 0.0) {
                    return Err(Error::invalid("bin_width must be > 0"));
                }
            }
        }
        Ok(())
    }

    /// Jump `β_n − α_n = c0·n^{−xi}` at total budget `n`.
    pub fn jump(&self, n_budget: u64) -> f64 {
        self.c0 * (n_budget as f64).powf(-self.xi)
    }

    /// Noiseless regression mean at `x` for total budget `n_budget`.
    pub fn eval_mean(&self, x: f64, n_budget: u64) -> f64 {
        match self.kind {
            ModelKind::ChangePoint => {
                if x <= self.d0 {
                    self.alpha_base
                } else {
                    self.alpha_base + self.jump(n_budget)
                }
            }
            ModelKind::Monotone | ModelKind::BinaryMonotone => self.curve.value(x),
            ModelKind::Unimodal => {
                let t = (x - self.d0).abs();
                match self.asym {
                    Some((a1, _)) if x <= self.d0 => (-a1 * t).exp(),
                    Some((_, a2)) => (-a2 * t).exp(),
                    None => self.curve.value(t),
                }
            }
        }
    }

    fn draw_response<R: Rng + ?Sized>(&self, x: f64, n_budget: u64, rng: &mut R) -> f64 {
        let m = self.eval_mean(x, n_budget);
        if self.kind == ModelKind::BinaryMonotone {
            return if rng.random::<f64>() < m { 1.0 } else { 0.0 };
        }
        let e = match self.noise {
            NoiseKind::Gaussian => rng.sample::<f64, _>(StandardNormal),
            NoiseKind::Uniform => (2.0 * rng.random::<f64>() - 1.0) * 3f64.sqrt(),
        };
        m + self.sigma * e
    }
}

/// Symmetric densities on `[−1, 1]` for zoomed-in designs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "snake_case", deny_unknown_fields)]
pub enum SymmetricDensity {
    Uniform,
    /// `g(w) = 1 − |w|`
    Triangular,
    /// `g(w) = ¾(1 − w²)`
    Epanechnikov,
    /// `g(w) ∝ exp(−rate·|w|)`
    TruncatedExponential { rate: f64 },
}

impl SymmetricDensity {
    pub fn pdf(&self, w: f64) -> f64 {
        if w.abs() > 1.0 {
            return 0.0;
        }
        match *self {
            SymmetricDensity::Uniform => 0.5,
            SymmetricDensity::Triangular => 1.0 - w.abs(),
            SymmetricDensity::Epanechnikov => 0.75 * (1.0 - w * w),
            SymmetricDensity::TruncatedExponential { rate } => {
                rate * (-rate * w.abs()).exp() / (2.0 * (1.0 - (-rate).exp()))
            }
        }
    }

    pub fn cdf(&self, w: f64) -> f64 {
        if w <= -1.0 {
            return 0.0;
        }
        if w >= 1.0 {
            return 1.0;
        }
        match *self {
            SymmetricDensity::Uniform => 0.5 * (w + 1.0),
            SymmetricDensity::Triangular => {
                if w < 0.0 {
                    0.5 * (1.0 + w).powi(2)
                } else {
                    1.0 - 0.5 * (1.0 - w).powi(2)
                }
            }
            SymmetricDensity::Epanechnikov => 0.5 + 0.75 * (w - w * w * w / 3.0),
            SymmetricDensity::TruncatedExponential { rate } => {
                let half = 0.5 * (1.0 - (-rate * w.abs()).exp()) / (1.0 - (-rate).exp());
                if w < 0.0 {
                    0.5 - half
                } else {
                    0.5 + half
                }
            }
        }
    }

    pub fn quantile(&self, u: f64) -> f64 {
        let u = u.clamp(0.0, 1.0);
        match *self {
            SymmetricDensity::Uniform => 2.0 * u - 1.0,
            SymmetricDensity::Triangular => {
                if u < 0.5 {
                    -1.0 + (2.0 * u).sqrt()
                } else {
                    1.0 - (2.0 * (1.0 - u)).sqrt()
                }
            }
            SymmetricDensity::Epanechnikov => 2.0 * ((2.0 * u - 1.0).asin() / 3.0).sin(),
            SymmetricDensity::TruncatedExponential { rate } => {
                let v = (2.0 * u - 1.0).abs();
                let t = -(1.0 - v * (1.0 - (-rate).exp())).ln() / rate;
                if u < 0.5 {
                    -t
                } else {
                    t
                }
            }
        }
    }
}

/// A closed interval inside `[0, 1]`, flagged when it had to be clipped.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Window {
    pub lo: f64,
    pub hi: f64,
    pub clipped: bool,
}

impl Window {
    pub fn new(lo: f64, hi: f64) -> Self {
        Window {
            lo,
            hi,
            clipped: false,
        }
    }

    /// `[lo, hi] ∩ [0, 1]`, flagged when the intersection is proper.
    pub fn clipped_to_unit(lo: f64, hi: f64) -> Self {
        let (clo, chi) = (lo.max(0.0), hi.min(1.0));
        Window {
            lo: clo,
            hi: chi,
            clipped: clo != lo || chi != hi,
        }
    }

    pub fn contains(&self, x: f64) -> bool {
        x >= self.lo && x <= self.hi
    }

    pub fn midpoint(&self) -> f64 {
        0.5 * (self.lo + self.hi)
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }
}

/// Sampling design for the covariates of one stage.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum DesignSpec {
    UniformGlobal { a: f64, b: f64 },
    UniformZoom { center: f64, halfwidth: f64 },
    /// `X = center + W·halfwidth` with `W ~ density`.
    SymmetricZoom {
        center: f64,
        halfwidth: f64,
        density: SymmetricDensity,
    },
}

impl DesignSpec {
    pub fn unit() -> Self {
        DesignSpec::UniformGlobal { a: 0.0, b: 1.0 }
    }

    /// Support intersected with `[0, 1]`.
    pub fn support(&self) -> Result<Window> {
        let w = match *self {
            DesignSpec::UniformGlobal { a, b } => Window::clipped_to_unit(a, b),
            DesignSpec::UniformZoom { center, halfwidth }
            | DesignSpec::SymmetricZoom {
                center, halfwidth, ..
            } => Window::clipped_to_unit(center - halfwidth, center + halfwidth),
        };
        if !(w.hi > w.lo) {
            return Err(Error::EmptyDesignSupport);
        }
        Ok(w)
    }

    /// Density of the design at `x` after conditioning on `[0, 1]`.
    pub fn density(&self, x: f64) -> Result<f64> {
        let s = self.support()?;
        if !s.contains(x) {
            return Ok(0.0);
        }
        Ok(match *self {
            DesignSpec::UniformGlobal { .. } | DesignSpec::UniformZoom { .. } => 1.0 / s.width(),
            DesignSpec::SymmetricZoom {
                center,
                halfwidth,
                density,
            } => {
                let mass = density.cdf((s.hi - center) / halfwidth)
                    - density.cdf((s.lo - center) / halfwidth);
                density.pdf((x - center) / halfwidth) / (halfwidth * mass)
            }
        })
    }

    /// Draw one covariate from the design restricted to `[0, 1]`.
    fn draw<R: Rng + ?Sized>(&self, support: &Window, rng: &mut R) -> f64 {
        let u: f64 = rng.random();
        match *self {
            DesignSpec::UniformGlobal { .. } | DesignSpec::UniformZoom { .. } => {
                support.lo + u * support.width()
            }
            DesignSpec::SymmetricZoom {
                center,
                halfwidth,
                density,
            } => {
                let flo = density.cdf((support.lo - center) / halfwidth);
                let fhi = density.cdf((support.hi - center) / halfwidth);
                let w = density.quantile(flo + u * (fhi - flo));
                (center + w * halfwidth).clamp(support.lo, support.hi)
            }
        }
    }
}

/// Covariate/response pairs of one stage, in generation order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleBatch {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub stage: u8,
    pub design: DesignSpec,
    /// Total budget `n` that parameterizes the fading jump.
    pub n_budget: u64,
}

impl SampleBatch {
    pub fn len(&self) -> usize {
        self.x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }

    /// Pairs sorted by covariate.
    pub fn sorted_pairs(&self) -> Vec<(f64, f64)> {
        let mut v: Vec<(f64, f64)> = self.x.iter().copied().zip(self.y.iter().copied()).collect();
        v.sort_by(|a, b| a.0.total_cmp(&b.0));
        v
    }

    /// Build a batch from raw data (stage 1, unit design).
    pub fn from_data(x: Vec<f64>, y: Vec<f64>) -> Result<Self> {
        if x.len() != y.len() {
            return Err(Error::invalid("x and y differ in length"));
        }
        Ok(SampleBatch {
            x,
            y,
            stage: 1,
            design: DesignSpec::unit(),
            n_budget: 1,
        })
    }
}

/// Draw `count` i.i.d. covariates from `design` and their responses.
pub fn sample_batch<R: Rng + ?Sized>(
    model: &ModelSpec,
    design: &DesignSpec,
    count: usize,
    n_budget: u64,
    stage: u8,
    rng: &mut R,
) -> Result<SampleBatch> {
    if count == 0 {
        return Err(Error::invalid("count must be ≥ 1"));
    }
    let support = design.support()?;
    let mut x = Vec::with_capacity(count);
    let mut y = Vec::with_capacity(count);
    for _ in 0..count {
        let xi = design.draw(&support, rng);
        y.push(model.draw_response(xi, n_budget, rng));
        x.push(xi);
    }
    Ok(SampleBatch {
        x,
        y,
        stage,
        design: *design,
        n_budget,
    })
}

/// Zoomed-in interval `d̂₁ ± K·n₁^{−γ}` clipped to `[0, 1]`.
///
/// With `shrink_by_b = Some(b)` the half-width is `(K − b)·n₁^{−γ}`, the
/// search domain of the second-stage mode estimator.
pub fn second_stage_interval(
    d1_hat: f64,
    k: f64,
    gamma: f64,
    n1: u64,
    shrink_by_b: Option<f64>,
) -> Result<Window> {
    if !(k > 0.0 && gamma > 0.0 && n1 >= 1) {
        return Err(Error::invalid("need K > 0, γ > 0, n1 ≥ 1"));
    }
    let scale = match shrink_by_b {
        Some(b) if k <= b => return Err(Error::BinExceedsHalfwidth { k, b }),
        Some(b) => k - b,
        None => k,
    };
    let h = scale * (n1 as f64).powf(-gamma);
    Ok(Window::clipped_to_unit(d1_hat - h, d1_hat + h))
}

/// Misclassification risk of `f(x) = 1[x ≥ threshold]` under Uniform[0,1]
/// test covariates: `∫₀¹(1−r) + ∫₀ᵃ(2r−1)`.
pub fn risk_uniform(curve: &CurveSpec, threshold: f64) -> f64 {
    let a = threshold.clamp(0.0, 1.0);
    match (curve.integral_from_zero(1.0), curve.integral_from_zero(a)) {
        (Some(total), Some(part)) => (1.0 - total) + (2.0 * part - a),
        _ => {
            let tol = 1e-10;
            integrate(|x| 1.0 - curve.value(x), 0.0, 1.0, tol)
                + integrate(|x| 2.0 * curve.value(x) - 1.0, 0.0, a, tol)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::seeding::derive_stream;

    fn line() -> CurveSpec {
        CurveSpec::Linear {
            intercept: 0.0,
            slope: 1.0,
        }
    }

    #[test]
    fn changepoint_levels() {
        let m = ModelSpec::changepoint(0.5, 0.0, 1.0, 0.0, 1.0);
        assert_eq!(m.eval_mean(0.25, 1), 0.0);
        let m = ModelSpec::changepoint(0.5, 0.0, 1.0, 0.25, 1.0);
        assert!((m.eval_mean(0.75, 16) - 0.5).abs() < 1e-15);
        assert_eq!(m.eval_mean(0.5, 16), 0.0);
    }

    #[test]
    fn unimodal_peak_value() {
        let m = ModelSpec::unimodal(CurveSpec::ExpCusp { rate: 1.0 }, 0.3, 1.0, 0.1);
        assert_eq!(m.eval_mean(0.3, 1), 1.0);
    }

    #[test]
    fn derivative_matches_central_differences() {
        let curves = [
            line(),
            CurveSpec::Logistic {
                location: 0.4,
                scale: 0.1,
            },
            CurveSpec::ExpCusp { rate: 2.0 },
            CurveSpec::QuadraticCap { curvature: 1.0 },
        ];
        for c in curves {
            for i in 1..20 {
                let x = i as f64 / 20.0;
                let h = 1e-5;
                let fd = (c.value(x + h) - c.value(x - h)) / (2.0 * h);
                let d = c.derivative(x);
                let rel = (fd - d).abs() / d.abs().max(1e-3);
                assert!(rel <= 1e-6, "{c:?} at {x}: {fd} vs {d}");
            }
        }
    }

    #[test]
    fn inverses_round_trip() {
        let c = CurveSpec::Logistic {
            location: 0.4,
            scale: 0.1,
        };
        for y in [0.1, 0.5, 0.9] {
            assert!((c.value(c.inverse(y).unwrap()) - y).abs() < 1e-12);
        }
        assert_eq!(CurveSpec::ExpCusp { rate: 1.0 }.inverse(0.5), None);
    }

    #[test]
    fn noiseless_batches_are_exact() {
        let models = [
            ModelSpec::changepoint(0.5, 0.2, 1.0, 0.25, 0.0),
            ModelSpec::monotone(line(), 0.5, 0.0).unwrap(),
            ModelSpec::unimodal(CurveSpec::QuadraticCap { curvature: 1.0 }, 0.4, 0.0, 0.1),
        ];
        let mut rng = derive_stream(1, "model-test", 0);
        for m in &models {
            let b = sample_batch(m, &DesignSpec::unit(), 200, 64, 1, &mut rng).unwrap();
            for (x, y) in b.x.iter().zip(&b.y) {
                assert_eq!(*y, m.eval_mean(*x, 64));
            }
        }
    }

    #[test]
    fn uniform_design_mean() {
        let m = ModelSpec::monotone(line(), 0.5, 1.0).unwrap();
        let mut rng = derive_stream(1, "model-test", 1);
        let b = sample_batch(&m, &DesignSpec::unit(), 10_000, 1, 1, &mut rng).unwrap();
        let mean = b.x.iter().sum::<f64>() / 1e4;
        // 4·sd/√n with sd = 1/√12
        assert!((mean - 0.5).abs() < 4.0 / 12f64.sqrt() / 100.0);
        assert!((mean - 0.5).abs() < 0.02);
    }

    #[test]
    fn degenerate_bernoulli() {
        let m = ModelSpec {
            curve: CurveSpec::Linear {
                intercept: 1.0,
                slope: 0.0,
            },
            ..ModelSpec::binary(line()).unwrap()
        };
        let mut rng = derive_stream(1, "model-test", 2);
        let b = sample_batch(&m, &DesignSpec::unit(), 500, 1, 1, &mut rng).unwrap();
        assert!(b.y.iter().all(|&y| y == 1.0));
    }

    #[test]
    fn empty_support_is_an_error() {
        let m = ModelSpec::monotone(line(), 0.5, 1.0).unwrap();
        let mut rng = derive_stream(1, "model-test", 3);
        let d = DesignSpec::UniformZoom {
            center: 0.5,
            halfwidth: 0.0,
        };
        let err = sample_batch(&m, &d, 10, 1, 2, &mut rng).unwrap_err();
        assert_eq!(err.to_string(), "empty design support");
    }

    #[test]
    fn symmetric_zoom_is_centered() {
        let m = ModelSpec::monotone(line(), 0.5, 1.0).unwrap();
        let mut rng = derive_stream(1, "model-test", 4);
        let count = 20_000;
        for density in [
            SymmetricDensity::Triangular,
            SymmetricDensity::Epanechnikov,
            SymmetricDensity::TruncatedExponential { rate: 3.0 },
        ] {
            let d = DesignSpec::SymmetricZoom {
                center: 0.5,
                halfwidth: 0.2,
                density,
            };
            let b = sample_batch(&m, &d, count, 1, 2, &mut rng).unwrap();
            let dev: Vec<f64> = b.x.iter().map(|x| x - 0.5).collect();
            let mean = crate::numerics::mean(&dev);
            let sd = crate::numerics::variance(&dev).sqrt();
            assert!(mean.abs() < 4.0 * sd / (count as f64).sqrt(), "{density:?}");
            assert!(b.x.iter().all(|x| (0.3..=0.7).contains(x)));
        }
    }

    #[test]
    fn symmetric_densities_are_normalized() {
        for g in [
            SymmetricDensity::Uniform,
            SymmetricDensity::Triangular,
            SymmetricDensity::Epanechnikov,
            SymmetricDensity::TruncatedExponential { rate: 2.5 },
        ] {
            let total = integrate(|w| g.pdf(w), -1.0, 1.0, 1e-12);
            assert!((total - 1.0).abs() <= 1e-8, "{g:?}: {total}");
            for i in 0..=20 {
                let w = i as f64 / 20.0;
                assert_eq!(g.pdf(w), g.pdf(-w));
                assert!((g.quantile(g.cdf(w - 0.5)) - (w - 0.5)).abs() < 1e-9);
                let fd = integrate(|v| g.pdf(v), -1.0, w, 1e-12);
                assert!((fd - g.cdf(w)).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn clipped_design_stays_in_unit_interval() {
        let d = DesignSpec::SymmetricZoom {
            center: 0.05,
            halfwidth: 0.2,
            density: SymmetricDensity::Triangular,
        };
        let s = d.support().unwrap();
        assert!(s.clipped);
        assert_eq!(s.lo, 0.0);
        let mass = integrate(|x| d.density(x).unwrap(), 0.0, 0.25, 1e-12);
        assert!((mass - 1.0).abs() < 1e-8);
    }

    #[test]
    fn second_stage_intervals() {
        let w = second_stage_interval(0.5, 1.0, 0.5, 100, None).unwrap();
        assert!((w.lo - 0.4).abs() < 1e-12 && (w.hi - 0.6).abs() < 1e-12 && !w.clipped);
        let w = second_stage_interval(0.05, 1.0, 0.5, 100, None).unwrap();
        assert_eq!(w.lo, 0.0);
        assert!((w.hi - 0.15).abs() < 1e-12 && w.clipped);
        let w = second_stage_interval(0.5, 1.0, 0.5, 100, Some(0.1)).unwrap();
        assert!((w.lo - 0.41).abs() < 1e-12 && (w.hi - 0.59).abs() < 1e-12);
        let e = second_stage_interval(0.5, 0.1, 0.5, 100, Some(0.1)).unwrap_err();
        assert!(e.to_string().starts_with("bin exceeds halfwidth"));
    }

    #[test]
    fn risk_of_identity_curve() {
        let c = line();
        assert!((risk_uniform(&c, 0.5) - 0.25).abs() < 1e-15);
        assert!((risk_uniform(&c, 1.0) - 0.5).abs() < 1e-15);
        assert!((risk_uniform(&c, 0.75) - risk_uniform(&c, 0.5) - 0.0625).abs() < 1e-15);
    }

    #[test]
    fn closed_form_risk_matches_quadrature() {
        let c = CurveSpec::Logistic {
            location: 0.45,
            scale: 0.08,
        };
        for a in [0.0, 0.2, 0.45, 0.7, 1.0] {
            let q = integrate(|x| 1.0 - c.value(x), 0.0, 1.0, 1e-12)
                + integrate(|x| 2.0 * c.value(x) - 1.0, 0.0, a, 1e-12);
            assert!((risk_uniform(&c, a) - q).abs() < 1e-10);
        }
    }

    #[test]
    fn bayes_threshold_minimizes_risk() {
        for c in [
            line(),
            CurveSpec::Logistic {
                location: 0.45,
                scale: 0.08,
            },
        ] {
            let d0 = c.inverse(0.5).unwrap();
            let best = risk_uniform(&c, d0);
            for i in 0..=1000 {
                let a = i as f64 / 1000.0;
                let r = risk_uniform(&c, a);
                assert!(r >= best - 1e-15);
                if (a - d0).abs() > 1e-9 {
                    assert!(r > best);
                }
            }
            let h = 1e-4;
            let fd = (risk_uniform(&c, d0 + h) - risk_uniform(&c, d0 - h)) / (2.0 * h);
            assert!(fd.abs() < 1e-6);
        }
    }

    #[test]
    fn unimodal_symmetry() {
        let mut rng = derive_stream(9, "sym", 0);
        for profile in [
            CurveSpec::ExpCusp { rate: 1.0 },
            CurveSpec::QuadraticCap { curvature: 1.0 },
        ] {
            // Dyadic offsets keep d0 ± t exact.
            let m = ModelSpec::unimodal(profile, 0.375, 1.0, 0.1);
            for _ in 0..200 {
                let t = rng.random_range(0..1u32 << 20) as f64 * 0.375 / (1u32 << 20) as f64;
                assert_eq!(m.eval_mean(0.375 + t, 1), m.eval_mean(0.375 - t, 1));
            }
        }
    }

    #[test]
    fn json_rejects_unknown_fields() {
        let m = ModelSpec::changepoint(0.5, 0.0, 1.0, 0.25, 0.5);
        let s = serde_json::to_string(&m).unwrap();
        let back: ModelSpec = serde_json::from_str(&s).unwrap();
        assert_eq!(back, m);
        let bad = s.replacen('{', "{\"bogus\":1,", 1);
        assert!(serde_json::from_str::<ModelSpec>(&bad).is_err());
        let d: DesignSpec = serde_json::from_str(
            r#"{"type":"symmetric_zoom","center":0.5,"halfwidth":0.1,"density":{"name":"triangular"}}"#,
        )
        .unwrap();
        assert!(matches!(d, DesignSpec::SymmetricZoom { .. }));
        assert!(serde_json::from_str::<DesignSpec>(r#"{"type":"uniform_zoom","center":0.5,"halfwidth":0.1,"x":1}"#).is_err());
    }
}
