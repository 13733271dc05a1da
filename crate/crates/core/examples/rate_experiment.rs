//! Empirical convergence rates from a log-log fit of RMSE against n.

use twostage::harness::{ErrorSummary, Estimator, Harness};
use twostage::model::{DesignSpec, ModelSpec};
use twostage::two_stage::{Problem, TwoStageConfig};

fn main() -> twostage::Result<()> {
    let h = Harness::new(7, 0)?;
    let model = ModelSpec::default_for(Problem::ChangePoint);
    let grid: Vec<u64> = (10..=14).map(|k| 1 << k).collect();
    for est in [
        Estimator::TwoStage {
            config: TwoStageConfig::default_for(Problem::ChangePoint, 0),
        },
        Estimator::OneStage {
            design: DesignSpec::unit(),
        },
    ] {
        let r = h.rate_experiment(&model, &est, &grid, 200, ErrorSummary::Rmse)?.report;
        println!(
            "{:<10} slope {:+.3} ± {:.3}  (target {:+.3})",
            match est {
                Estimator::TwoStage { .. } => "two-stage",
                Estimator::OneStage { .. } => "one-stage",
            },
            r.slope,
            r.slope_se,
            r.target_slope
        );
    }
    Ok(())
}
