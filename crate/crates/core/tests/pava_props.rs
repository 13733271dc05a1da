use proptest::prelude::*;
use twostage::estimators::{isotonic_fit, isotonic_inverse, pava, switching_argmin};
use twostage::model::{SampleBatch, Window};

fn data() -> impl Strategy<Value = (Vec<f64>, Vec<f64>)> {
    (1usize..40).prop_flat_map(|n| {
        (
            prop::collection::vec(-5.0f64..5.0, n),
            prop::collection::vec(0.01f64..10.0, n),
        )
    })
}

proptest! {
    #[test]
    fn output_is_monotone((y, w) in data()) {
        let fit = pava(&y, &w);
        prop_assert_eq!(fit.len(), y.len());
        prop_assert!(fit.windows(2).all(|p| p[0] <= p[1] + 1e-12));
    }

    #[test]
    fn preserves_weighted_mean((y, w) in data()) {
        let fit = pava(&y, &w);
        let total: f64 = w.iter().sum();
        let before: f64 = y.iter().zip(&w).map(|(a, b)| a * b).sum::<f64>() / total;
        let after: f64 = fit.iter().zip(&w).map(|(a, b)| a * b).sum::<f64>() / total;
        prop_assert!((before - after).abs() < 1e-9);
    }

    #[test]
    fn monotone_input_is_fixed(mut y in prop::collection::vec(-5.0f64..5.0, 1..40)) {
        y.sort_by(f64::total_cmp);
        let w = vec![1.0; y.len()];
        prop_assert_eq!(pava(&y, &w), y);
    }

    #[test]
    fn idempotent((y, w) in data()) {
        let once = pava(&y, &w);
        let twice = pava(&once, &w);
        for (a, b) in once.iter().zip(&twice) {
            prop_assert!((a - b).abs() < 1e-12);
        }
    }

    // Projection onto a convex cone: the residual is orthogonal to the fit.
    #[test]
    fn residual_orthogonal_to_fit((y, w) in data()) {
        let fit = pava(&y, &w);
        let inner: f64 = (0..y.len()).map(|i| w[i] * (y[i] - fit[i]) * fit[i]).sum();
        prop_assert!(inner.abs() < 1e-8);
    }

    #[test]
    fn no_monotone_vector_is_closer((y, w) in data(), bump in -1.0f64..1.0, at in 0usize..40) {
        let fit = pava(&y, &w);
        let loss = |v: &[f64]| -> f64 { (0..y.len()).map(|i| w[i] * (y[i] - v[i]).powi(2)).sum() };
        // Raising a suffix or lowering a prefix keeps the vector monotone.
        let k = at % y.len();
        let up: Vec<f64> = fit.iter().enumerate().map(|(i, &v)| if i >= k { v + bump.abs() } else { v }).collect();
        let down: Vec<f64> = fit.iter().enumerate().map(|(i, &v)| if i <= k { v - bump.abs() } else { v }).collect();
        prop_assert!(loss(&fit) <= loss(&up) + 1e-9);
        prop_assert!(loss(&fit) <= loss(&down) + 1e-9);
    }

    #[test]
    fn commutes_with_increasing_affine_maps(y in prop::collection::vec(-5.0f64..5.0, 1..40), a in 0.1f64..10.0, c in -5.0f64..5.0) {
        let w = vec![1.0; y.len()];
        let mapped: Vec<f64> = y.iter().map(|v| a * v + c).collect();
        let lhs = pava(&mapped, &w);
        let rhs: Vec<f64> = pava(&y, &w).iter().map(|v| a * v + c).collect();
        for (l, r) in lhs.iter().zip(&rhs) {
            prop_assert!((l - r).abs() < 1e-10 * (1.0 + l.abs()));
        }
    }

    #[test]
    fn inverse_agrees_with_forward_fit(
        pts in prop::collection::vec((0.0f64..1.0, -1.0f64..2.0), 1..60),
        t0 in -1.0f64..2.0,
    ) {
        let (x, y): (Vec<f64>, Vec<f64>) = pts.into_iter().unzip();
        let fit = isotonic_fit(&SampleBatch::from_data(x, y).unwrap(), &Window::new(0.0, 1.0)).unwrap();
        let inv = isotonic_inverse(&fit, t0);
        for &k in &fit.knots {
            for d in [k.next_down(), k, k.next_up()] {
                if d < fit.domain.0 || d > fit.domain.1 {
                    continue;
                }
                // Right-continuous inverse: below it the fit is ≤ t0, above it > t0.
                if d < inv {
                    prop_assert!(fit.eval(d) <= t0);
                }
                if d > inv {
                    prop_assert!(fit.eval(d) > t0);
                }
            }
        }
    }

    #[test]
    fn inverse_and_switching_are_adjacent(
        pts in prop::collection::vec((0.0f64..1.0, -1.0f64..2.0), 2..60),
        t0 in 0.0f64..1.0,
    ) {
        let (x, y): (Vec<f64>, Vec<f64>) = pts.into_iter().unzip();
        let batch = SampleBatch::from_data(x.clone(), y).unwrap();
        let mut xs = x;
        xs.sort_by(f64::total_cmp);
        xs.dedup();
        let fit = isotonic_fit(&batch, &Window::new(0.0, 1.0)).unwrap();
        // Above t0 everywhere the inverse is the left end, which is not a covariate.
        prop_assume!(fit.levels[0] <= t0);
        let rank = |v: f64| xs.partition_point(|&x| x < v);
        let gap = rank(isotonic_inverse(&fit, t0)).abs_diff(rank(switching_argmin(&batch, t0).unwrap()));
        prop_assert!(gap <= 1);
    }
}
