//! Active threshold classification: excess misclassification risk of the
//! two-stage classifier against a one-stage classifier that already knows
//! where to put its design mass.

use twostage::harness::Harness;
use twostage::model::{CurveSpec, ModelSpec, SymmetricDensity};
use twostage::two_stage::{Problem, TwoStageConfig};

fn main() -> twostage::Result<()> {
    let model = ModelSpec::binary(CurveSpec::Linear {
        intercept: 0.0,
        slope: 1.0,
    })?;
    let cfg = TwoStageConfig::default_for(Problem::Classification, 0);
    let h = Harness::new(5, 0)?;
    let grid = [1 << 10, 1 << 12, 1 << 14];
    let r = h.excess_risk_experiment(&model, &cfg, &grid, 200, SymmetricDensity::Epanechnikov)?;
    println!("{:>8} {:>14} {:>14}", "n", "two-stage", "one-stage");
    for i in 0..grid.len() {
        println!("{:>8} {:>14.3e} {:>14.3e}", grid[i], r.two_stage_excess[i], r.one_stage_excess[i]);
    }
    println!(
        "slopes: {:.3} (target {:.3}) and {:.3} (target {:.3})",
        r.two_stage_slope, r.two_stage_target, r.one_stage_slope, r.one_stage_target
    );
    Ok(())
}
