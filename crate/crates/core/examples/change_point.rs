//! Two-stage change-point estimation with a fading jump, against the
//! one-stage least-squares fit on the same budget.

use twostage::model::{DesignSpec, ModelSpec};
use twostage::seeding::derive_stream;
use twostage::two_stage::{run_one_stage, run_two_stage, Problem, TwoStageConfig};

fn main() -> twostage::Result<()> {
    let model = ModelSpec::changepoint(0.5, 0.0, 1.0, 0.25, 0.25);
    let n = 1 << 14;
    let cfg = TwoStageConfig::default_for(Problem::ChangePoint, n);
    let (mut se1, mut se2) = (0.0, 0.0);
    let reps = 200;
    for rep in 0..reps {
        let two = run_two_stage(&model, &cfg, &mut derive_stream(11, "cp-two", rep))?;
        let one = run_one_stage(&model, n, &DesignSpec::unit(), &mut derive_stream(11, "cp-one", rep))?;
        se2 += (two.d2_hat - model.d0).powi(2);
        se1 += (one.d2_hat - model.d0).powi(2);
        if rep == 0 {
            println!(
                "first run: d1 = {:.5}, d2 = {:.6}, window [{:.4}, {:.4}], alpha = {:.3}, beta = {:.3}",
                two.d1_hat,
                two.d2_hat,
                two.window.lo,
                two.window.hi,
                two.alpha_hat.unwrap(),
                two.beta_hat.unwrap()
            );
        }
    }
    let rmse = |s: f64| (s / reps as f64).sqrt();
    println!("n = {n}: one-stage rmse {:.3e}, two-stage rmse {:.3e}", rmse(se1), rmse(se2));
    Ok(())
}
