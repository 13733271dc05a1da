//! Stage-one and stage-two estimators.
//!
//! Every criterion here is piecewise constant between a finite set of
//! candidate locations (order statistics, window endpoints, `xᵢ ± b`), so all
//! argmins/argmaxes are exact scans over those candidates. Ties always go to
//! the smallest optimizer.

use serde::{Deserialize, Serialize};

use crate::model::{SampleBatch, Window};
use crate::{Error, Result};

/// Joint least-squares fit of a two-level step.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SplitFit {
    pub alpha_hat: f64,
    pub beta_hat: f64,
    /// Largest covariate of the left segment.
    pub d_hat: f64,
    pub sse: f64,
    /// Sorted index of `d_hat`.
    pub split_index: usize,
}

/// Minimise `Σ (Y−α)²1[X≤d] + (Y−β)²1[X>d]` jointly over `(α, β, d)`.
pub fn fit_changepoint_joint(batch: &SampleBatch) -> Result<SplitFit> {
    let pairs = batch.sorted_pairs();
    let n = pairs.len();
    if n < 2 || pairs[0].0 == pairs[n - 1].0 {
        return Err(Error::NoAdmissibleSplit);
    }
    let total: f64 = pairs.iter().map(|p| p.1).sum();
    let total_sq: f64 = pairs.iter().map(|p| p.1 * p.1).sum();
    // Differences below this are rounding noise and count as ties.
    let tol = 1e-12 * total_sq;

    let mut best: Option<SplitFit> = None;
    let mut left = 0.0;
    for k in 0..n - 1 {
        left += pairs[k].1;
        if pairs[k].0 == pairs[k + 1].0 {
            continue;
        }
        let (nl, nr) = ((k + 1) as f64, (n - k - 1) as f64);
        let right = total - left;
        let sse = (total_sq - left * left / nl - right * right / nr).max(0.0);
        if best.is_none_or(|b| sse < b.sse - tol) {
            best = Some(SplitFit {
                alpha_hat: left / nl,
                beta_hat: right / nr,
                d_hat: pairs[k].0,
                sse,
                split_index: k,
            });
        }
    }
    best.ok_or(Error::NoAdmissibleSplit)
}

/// Result of a windowed second-stage search.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WindowedFit {
    pub d_hat: f64,
    /// No data informed the criterion; `d_hat` is the window midpoint.
    pub vacuous: bool,
}

/// Second-stage change-point estimate with the levels plugged in from stage one.
///
/// Minimises `Σ (Y−α̂)²1[X≤d] + (Y−β̂)²1[X>d]` over `d ∈ window`. Up to a
/// constant this is `Σ_{X≤d} (β̂−α̂)(2Y − α̂ − β̂)`, which is scanned over the
/// window endpoints and the order statistics inside the window.
pub fn fit_changepoint_plugin(
    batch2: &SampleBatch,
    alpha_hat: f64,
    beta_hat: f64,
    window: &Window,
) -> Result<WindowedFit> {
    if alpha_hat == beta_hat {
        return Err(Error::invalid("plug-in levels must differ"));
    }
    if !(window.hi >= window.lo) {
        return Err(Error::invalid("empty window"));
    }
    let gap = beta_hat - alpha_hat;
    let mid = 0.5 * (alpha_hat + beta_hat);
    let pairs = batch2.sorted_pairs();
    if !pairs.iter().any(|p| window.contains(p.0)) {
        return Ok(WindowedFit {
            d_hat: window.midpoint(),
            vacuous: true,
        });
    }
    let contrib = |y: f64| gap * (2.0 * (y - mid));
    let tol = 1e-12 * pairs.iter().map(|p| contrib(p.1).abs()).sum::<f64>();

    let mut i = 0;
    let mut cum = 0.0;
    while i < pairs.len() && pairs[i].0 <= window.lo {
        cum += contrib(pairs[i].1);
        i += 1;
    }
    let (mut best_d, mut best) = (window.lo, cum);
    while i < pairs.len() && pairs[i].0 <= window.hi {
        let x = pairs[i].0;
        while i < pairs.len() && pairs[i].0 == x {
            cum += contrib(pairs[i].1);
            i += 1;
        }
        if cum < best - tol {
            best = cum;
            best_d = x;
        }
    }
    Ok(WindowedFit {
        d_hat: best_d,
        vacuous: false,
    })
}

/// Weighted least-squares projection onto nondecreasing sequences
/// (pool adjacent violators).
pub fn pava(values: &[f64], weights: &[f64]) -> Vec<f64> {
    assert_eq!(values.len(), weights.len(), "values/weights length mismatch");
    // (weighted sum, total weight, count)
    let mut blocks: Vec<(f64, f64, usize)> = Vec::with_capacity(values.len());
    for (&v, &w) in values.iter().zip(weights) {
        debug_assert!(w > 0.0);
        let mut cur = (v * w, w, 1usize);
        while let Some(&(s, tw, c)) = blocks.last() {
            if s / tw > cur.0 / cur.1 {
                blocks.pop();
                cur = (cur.0 + s, cur.1 + tw, cur.2 + c);
            } else {
                break;
            }
        }
        blocks.push(cur);
    }
    let mut out = Vec::with_capacity(values.len());
    for (s, w, c) in blocks {
        out.extend(std::iter::repeat_n(s / w, c));
    }
    out
}

/// Right-continuous nondecreasing step function on `[domain.0, domain.1]`.
///
/// `knots` has one more entry than `levels`; `levels[i]` holds on
/// `[knots[i], knots[i+1])`, the last cell being closed on the right.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StepFunction {
    pub knots: Vec<f64>,
    pub levels: Vec<f64>,
    pub domain: (f64, f64),
}

impl StepFunction {
    pub fn new(knots: Vec<f64>, levels: Vec<f64>) -> Result<Self> {
        if levels.is_empty() || knots.len() != levels.len() + 1 {
            return Err(Error::invalid("need levels ≥ 1 and knots = levels + 1"));
        }
        if knots.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::invalid("knots must be strictly increasing"));
        }
        if levels.windows(2).any(|w| w[1] < w[0]) {
            return Err(Error::invalid("levels must be nondecreasing"));
        }
        let domain = (knots[0], knots[knots.len() - 1]);
        Ok(StepFunction {
            knots,
            levels,
            domain,
        })
    }

    /// Value at `x`; points outside the domain take the nearest end level.
    pub fn eval(&self, x: f64) -> f64 {
        let inner = &self.knots[1..self.knots.len() - 1];
        self.levels[inner.partition_point(|&k| k <= x)]
    }
}

/// Isotonic least-squares fit of a batch as a step function on `domain`.
///
/// The fit jumps at the covariate where each pooled block starts.
pub fn isotonic_fit(batch: &SampleBatch, domain: &Window) -> Result<StepFunction> {
    if batch.is_empty() {
        return Err(Error::invalid("empty batch"));
    }
    let pairs = batch.sorted_pairs();
    // Pre-pool tied covariates.
    let mut xs: Vec<f64> = Vec::new();
    let mut sums: Vec<f64> = Vec::new();
    let mut counts: Vec<f64> = Vec::new();
    for &(x, y) in &pairs {
        if xs.last() == Some(&x) {
            *sums.last_mut().unwrap() += y;
            *counts.last_mut().unwrap() += 1.0;
        } else {
            xs.push(x);
            sums.push(y);
            counts.push(1.0);
        }
    }
    let means: Vec<f64> = sums.iter().zip(&counts).map(|(s, c)| s / c).collect();
    let fitted = pava(&means, &counts);

    let lo = domain.lo.min(xs[0]);
    let hi = if xs[xs.len() - 1] >= domain.hi {
        xs[xs.len() - 1].next_up()
    } else {
        domain.hi
    };
    let mut knots = vec![lo];
    let mut levels = vec![fitted[0]];
    for i in 1..xs.len() {
        if fitted[i] > *levels.last().unwrap() {
            knots.push(xs[i]);
            levels.push(fitted[i]);
        }
    }
    knots.push(hi);
    StepFunction::new(knots, levels)
}

/// Right-continuous inverse `sup{d ∈ domain : fit(d) ≤ t0}`.
pub fn isotonic_inverse(fit: &StepFunction, t0: f64) -> f64 {
    let below = fit.levels.partition_point(|&l| l <= t0);
    if below == fit.levels.len() {
        fit.domain.1
    } else {
        fit.knots[below]
    }
}

/// Smallest minimiser over the sorted covariates of `V⁰(x) − t0·G⁰(x)`,
/// i.e. of the cumulative sum `Σ_{Xᵢ≤x} (Yᵢ − t0)`.
pub fn switching_argmin(batch: &SampleBatch, t0: f64) -> Result<f64> {
    if batch.is_empty() {
        return Err(Error::invalid("empty batch"));
    }
    let pairs = batch.sorted_pairs();
    let mut cum = 0.0;
    let mut best = f64::INFINITY;
    let mut arg = pairs[0].0;
    let mut i = 0;
    while i < pairs.len() {
        let x = pairs[i].0;
        while i < pairs.len() && pairs[i].0 == x {
            cum += pairs[i].1 - t0;
            i += 1;
        }
        if cum < best {
            best = cum;
            arg = x;
        }
    }
    Ok(arg)
}

/// Binned ("shorth"-type) mode search.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModeFit {
    pub d_hat: f64,
    /// Criterion value `Pₙ Y·1[|X − d̂| ≤ b]` at the returned location.
    pub value: f64,
    pub vacuous: bool,
}

/// Maximise `Pₙ Y·1[|X − d| ≤ b]` over `d ∈ search`.
///
/// Candidates are `{xᵢ − b} ∪ {xᵢ + b} ∪ {search endpoints}`; the smallest
/// maximiser wins. When no covariate lies within `b` of the search interval
/// the criterion is identically zero and the midpoint is returned, flagged.
pub fn shorth_mode(batch: &SampleBatch, halfwidth: f64, search: &Window) -> Result<ModeFit> {
    if !(halfwidth > 0.0) {
        return Err(Error::invalid("bin half-width must be > 0"));
    }
    if !(search.hi >= search.lo) {
        return Err(Error::invalid("empty search interval"));
    }
    let pairs = batch.sorted_pairs();
    let xs: Vec<f64> = pairs.iter().map(|p| p.0).collect();
    let reach = Window::new(search.lo - halfwidth, search.hi + halfwidth);
    if !xs.iter().any(|&x| reach.contains(x)) {
        return Ok(ModeFit {
            d_hat: search.midpoint(),
            value: 0.0,
            vacuous: true,
        });
    }
    let mut prefix = Vec::with_capacity(xs.len() + 1);
    prefix.push(0.0);
    for p in &pairs {
        prefix.push(prefix.last().unwrap() + p.1);
    }
    let mut cands: Vec<f64> = Vec::with_capacity(2 * xs.len() + 2);
    cands.push(search.lo);
    cands.push(search.hi);
    for &x in &xs {
        for c in [x - halfwidth, x + halfwidth] {
            if search.contains(c) {
                cands.push(c);
            }
        }
    }
    cands.sort_by(f64::total_cmp);
    cands.dedup();

    // Candidates built as x ± b can miss x by an ulp when shifted back.
    let slack = 8.0 * f64::EPSILON;
    let n = xs.len() as f64;
    let mut best = ModeFit {
        d_hat: cands[0],
        value: f64::NEG_INFINITY,
        vacuous: false,
    };
    for d in cands {
        let l = xs.partition_point(|&x| x < d - halfwidth - slack);
        let r = xs.partition_point(|&x| x <= d + halfwidth + slack);
        let v = (prefix[r] - prefix[l]) / n;
        if v > best.value {
            best.value = v;
            best.d_hat = d;
        }
    }
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{sample_batch, CurveSpec, DesignSpec, ModelSpec};
    use crate::seeding::derive_stream;
    use rand::Rng;

    fn batch(x: &[f64], y: &[f64]) -> SampleBatch {
        SampleBatch::from_data(x.to_vec(), y.to_vec()).unwrap()
    }

    /// SSE of every admissible split, computed directly.
    fn brute_force_splits(b: &SampleBatch) -> Vec<(f64, f64)> {
        let mut xs = b.x.clone();
        xs.sort_by(f64::total_cmp);
        xs.dedup();
        xs[..xs.len() - 1]
            .iter()
            .map(|&d| {
                let left: Vec<f64> = b.x.iter().zip(&b.y).filter(|p| *p.0 <= d).map(|p| *p.1).collect();
                let right: Vec<f64> = b.x.iter().zip(&b.y).filter(|p| *p.0 > d).map(|p| *p.1).collect();
                let ml = left.iter().sum::<f64>() / left.len() as f64;
                let mr = right.iter().sum::<f64>() / right.len() as f64;
                let sse = left.iter().map(|y| (y - ml).powi(2)).sum::<f64>()
                    + right.iter().map(|y| (y - mr).powi(2)).sum::<f64>();
                (d, sse)
            })
            .collect()
    }

    #[test]
    fn perfect_two_level_split() {
        let f = fit_changepoint_joint(&batch(&[0.1, 0.2, 0.8, 0.9], &[0.0, 0.0, 1.0, 1.0])).unwrap();
        assert_eq!((f.d_hat, f.alpha_hat, f.beta_hat, f.sse), (0.2, 0.0, 1.0, 0.0));
        assert_eq!(f.split_index, 1);
    }

    #[test]
    fn constant_response_ties_go_left() {
        let f = fit_changepoint_joint(&batch(&[0.7, 0.1, 0.4, 0.3], &[0.3; 4])).unwrap();
        assert_eq!(f.d_hat, 0.1);
    }

    #[test]
    fn joint_fit_needs_two_distinct_points() {
        assert!(matches!(
            fit_changepoint_joint(&batch(&[0.4, 0.4], &[0.0, 1.0])),
            Err(Error::NoAdmissibleSplit)
        ));
        assert!(fit_changepoint_joint(&batch(&[0.4], &[0.0])).is_err());
    }

    #[test]
    fn joint_fit_matches_brute_force() {
        let model = ModelSpec::changepoint(0.4, 0.0, 1.0, 0.0, 0.7);
        let mut rng = derive_stream(5, "joint-bf", 0);
        for _ in 0..50 {
            let n = rng.random_range(2..60);
            let b = sample_batch(&model, &DesignSpec::unit(), n, 1, 1, &mut rng).unwrap();
            let fit = fit_changepoint_joint(&b).unwrap();
            let all = brute_force_splits(&b);
            let min = all.iter().map(|p| p.1).fold(f64::INFINITY, f64::min);
            assert!((fit.sse - min).abs() <= 1e-9 * (1.0 + min), "{} vs {}", fit.sse, min);
            let first = all.iter().find(|p| p.1 <= min + 1e-9 * (1.0 + min)).unwrap();
            assert_eq!(fit.d_hat, first.0);
            let left: Vec<f64> = b.x.iter().zip(&b.y).filter(|p| *p.0 <= fit.d_hat).map(|p| *p.1).collect();
            assert!((fit.alpha_hat - left.iter().sum::<f64>() / left.len() as f64).abs() < 1e-12);
        }
    }

    #[test]
    fn plugin_noiseless_lands_on_last_left_point() {
        let model = ModelSpec::changepoint(0.5, 0.0, 1.0, 0.0, 0.0);
        let mut rng = derive_stream(5, "plugin", 0);
        let w = Window::new(0.4, 0.6);
        let d = DesignSpec::UniformZoom {
            center: 0.5,
            halfwidth: 0.1,
        };
        let b = sample_batch(&model, &d, 300, 1, 2, &mut rng).unwrap();
        let fit = fit_changepoint_plugin(&b, 0.0, 1.0, &w).unwrap();
        let want = b.x.iter().copied().filter(|&x| x <= 0.5).fold(f64::NEG_INFINITY, f64::max);
        assert_eq!(fit.d_hat, want);
        assert!(!fit.vacuous);
    }

    #[test]
    fn plugin_vacuous_window() {
        let b = batch(&[0.1, 0.2], &[0.0, 1.0]);
        let fit = fit_changepoint_plugin(&b, 0.0, 1.0, &Window::new(0.6, 0.8)).unwrap();
        assert!(fit.vacuous);
        assert!((fit.d_hat - 0.7).abs() < 1e-15);
    }

    #[test]
    fn plugin_criteria_share_their_argmin() {
        let model = ModelSpec::changepoint(0.5, 0.0, 1.0, 0.0, 1.0);
        let mut rng = derive_stream(5, "plugin", 1);
        for _ in 0..50 {
            let w = Window::new(0.35, 0.65);
            let d = DesignSpec::UniformZoom {
                center: 0.5,
                halfwidth: 0.15,
            };
            let n = rng.random_range(5..80);
            let b = sample_batch(&model, &d, n, 1, 2, &mut rng).unwrap();
            let (a, be) = (rng.random_range(-0.5..0.5), rng.random_range(0.5..1.5));
            let mut cands = vec![w.lo, w.hi];
            cands.extend(b.x.iter().copied());
            cands.sort_by(f64::total_cmp);
            let full = |d: f64| -> f64 {
                b.x.iter()
                    .zip(&b.y)
                    .map(|(&x, &y)| if x <= d { (y - a).powi(2) } else { (y - be).powi(2) })
                    .sum()
            };
            let simplified = |d: f64| -> f64 {
                (be - a).signum()
                    * b.x.iter()
                        .zip(&b.y)
                        .map(|(&x, &y)| {
                            let ind = f64::from(u8::from(x <= d)) - f64::from(u8::from(x <= 0.5));
                            (y - 0.5 * (a + be)) * ind
                        })
                        .sum::<f64>()
                    / n as f64
            };
            let argmin = |f: &dyn Fn(f64) -> f64| {
                let vals: Vec<f64> = cands.iter().map(|&d| f(d)).collect();
                let m = vals.iter().copied().fold(f64::INFINITY, f64::min);
                let scale = vals.iter().map(|v| v.abs()).fold(1.0, f64::max);
                cands[vals.iter().position(|&v| v <= m + 1e-12 * scale).unwrap()]
            };
            let got = fit_changepoint_plugin(&b, a, be, &w).unwrap().d_hat;
            assert_eq!(argmin(&full), argmin(&simplified));
            assert_eq!(got, argmin(&full));
        }
    }

    #[test]
    fn pava_examples() {
        assert_eq!(pava(&[1.0, 3.0, 2.0], &[1.0; 3]), vec![1.0, 2.5, 2.5]);
        let mono = [0.0, 0.5, 0.5, 2.0];
        assert_eq!(pava(&mono, &[1.0; 4]), mono.to_vec());
        assert_eq!(pava(&[3.0, 1.0], &[1.0, 3.0]), vec![1.5, 1.5]);
    }

    #[test]
    fn step_function_eval_and_inverse() {
        let f = StepFunction::new(vec![0.0, 0.5, 1.0], vec![0.2, 0.6]).unwrap();
        assert_eq!(f.eval(0.0), 0.2);
        assert_eq!(f.eval(0.4999), 0.2);
        assert_eq!(f.eval(0.5), 0.6);
        assert_eq!(f.eval(1.0), 0.6);
        assert_eq!(isotonic_inverse(&f, 0.4), 0.5);
        assert_eq!(isotonic_inverse(&f, 0.6), 1.0);
        assert_eq!(isotonic_inverse(&f, 0.7), 1.0);
        assert_eq!(isotonic_inverse(&f, 0.1), 0.0);
        assert!(StepFunction::new(vec![0.0, 0.5, 1.0], vec![0.6, 0.2]).is_err());
        assert!(StepFunction::new(vec![0.0, 0.0, 1.0], vec![0.1, 0.2]).is_err());
        let js = serde_json::to_value(&f).unwrap();
        assert_eq!(js["domain"], serde_json::json!([0.0, 1.0]));
        assert_eq!(js["knots"], serde_json::json!([0.0, 0.5, 1.0]));
    }

    #[test]
    fn inverse_forward_consistency_at_knots() {
        let model = ModelSpec::monotone(CurveSpec::Linear { intercept: 0.0, slope: 1.0 }, 0.5, 0.3).unwrap();
        let mut rng = derive_stream(5, "inv", 0);
        for _ in 0..30 {
            let b = sample_batch(&model, &DesignSpec::unit(), 60, 1, 1, &mut rng).unwrap();
            let fit = isotonic_fit(&b, &Window::new(0.0, 1.0)).unwrap();
            for &t in fit.levels.iter().chain([0.5, -1.0, 2.0].iter()) {
                let inv = isotonic_inverse(&fit, t);
                for &k in &fit.knots {
                    for d in [k.next_down(), k, k.next_up()] {
                        if d < fit.domain.0 || d > fit.domain.1 {
                            continue;
                        }
                        if d == inv && inv < fit.domain.1 {
                            // The sup is not attained by a right-continuous fit.
                            assert!(fit.eval(d) > t);
                            continue;
                        }
                        assert_eq!(fit.eval(d) <= t, d <= inv);
                    }
                }
            }
        }
    }

    #[test]
    fn switching_monotone_cases() {
        let b = batch(&[0.3, 0.1, 0.2], &[0.0, 0.1, 0.2]);
        assert_eq!(switching_argmin(&b, 1.0).unwrap(), 0.3);
        assert_eq!(switching_argmin(&b, -1.0).unwrap(), 0.1);
    }

    #[test]
    fn shorth_single_point() {
        let b = batch(&[0.5], &[2.0]);
        let f = shorth_mode(&b, 0.1, &Window::new(0.0, 1.0)).unwrap();
        assert!((f.d_hat - 0.4).abs() < 1e-15);
        assert_eq!(f.value, 2.0);
    }

    #[test]
    fn shorth_flat_response_takes_smallest_candidate() {
        let b = batch(&[0.3, 0.6], &[0.0, 0.0]);
        let f = shorth_mode(&b, 0.1, &Window::new(0.1, 0.9)).unwrap();
        assert_eq!(f.d_hat, 0.1);
        let v = shorth_mode(&b, 0.1, &Window::new(0.8, 0.9)).unwrap();
        assert!(v.vacuous);
    }

    #[test]
    fn shorth_noiseless_tent() {
        let d0 = 0.437;
        let n = 2001;
        let x: Vec<f64> = (0..n).map(|i| i as f64 / (n - 1) as f64).collect();
        let y: Vec<f64> = x.iter().map(|v| 1.0 - (v - d0).abs()).collect();
        let f = shorth_mode(&batch(&x, &y), 0.05, &Window::new(0.05, 0.95)).unwrap();
        assert!((f.d_hat - d0).abs() <= 1.0 / (n - 1) as f64, "{}", f.d_hat);
    }
}
