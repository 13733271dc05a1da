//! Two-sample Kolmogorov–Smirnov distance.

/// Sup-distance between the empirical CDFs of `a` and `b`.
///
/// Ties across samples are handled by advancing both sides past a common
/// value before comparing, so the statistic is symmetric in its arguments.
pub fn ks_two_sample(a: &[f64], b: &[f64]) -> f64 {
    assert!(!a.is_empty() && !b.is_empty(), "empty sample");
    let mut a = a.to_vec();
    let mut b = b.to_vec();
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let (mut i, mut j) = (0usize, 0usize);
    let mut d: f64 = 0.0;
    while i < a.len() && j < b.len() {
        let v = a[i].min(b[j]);
        while i < a.len() && a[i] <= v {
            i += 1;
        }
        while j < b.len() && b[j] <= v {
            j += 1;
        }
        d = d.max((i as f64 / na - j as f64 / nb).abs());
    }
    d
}

/// Asymptotic two-sample critical value `c(α)·√((n+m)/(n·m))`,
/// with `c(α) = √(−ln(α/2)/2)`.
pub fn ks_critical_value(alpha: f64, n: usize, m: usize) -> f64 {
    let c = (-(alpha / 2.0).ln() / 2.0).sqrt();
    let (n, m) = (n as f64, m as f64);
    c * ((n + m) / (n * m)).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identical_samples_have_zero_distance() {
        let a = [0.3, 0.1, 0.2];
        assert_eq!(ks_two_sample(&a, &a), 0.0);
    }

    #[test]
    fn disjoint_samples_have_unit_distance() {
        assert_eq!(ks_two_sample(&[0.0, 1.0], &[2.0, 3.0, 4.0]), 1.0);
    }

    #[test]
    fn brute_force_agreement() {
        let a = [0.5, 1.0, 1.0, 2.5, 3.0];
        let b = [1.0, 2.0, 2.0, 4.0];
        let ecdf = |s: &[f64], t: f64| s.iter().filter(|v| **v <= t).count() as f64 / s.len() as f64;
        let brute = a
            .iter()
            .chain(b.iter())
            .map(|&t| (ecdf(&a, t) - ecdf(&b, t)).abs())
            .fold(0.0, f64::max);
        assert!((ks_two_sample(&a, &b) - brute).abs() < 1e-15);
        assert_eq!(ks_two_sample(&a, &b), ks_two_sample(&b, &a));
    }

    #[test]
    fn critical_value_one_percent() {
        // c(0.01) ≈ 1.6276
        let c = ks_critical_value(0.01, 100, 100) / (2.0f64 / 100.0).sqrt();
        assert!((c - 1.6276).abs() < 1e-3);
    }
}
