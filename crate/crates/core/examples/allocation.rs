//! How much of the budget to spend on the first stage.
//!
//! The zoom half-width follows the stage-one rate (`C/n1^nu`), with `C` a
//! Monte Carlo quantile of the stage-one error.

use twostage::harness::Harness;
use twostage::model::ModelSpec;
use twostage::two_stage::{Problem, TwoStageConfig};

fn main() -> twostage::Result<()> {
    let h = Harness::new(2, 0)?;
    let model = ModelSpec::default_for(Problem::InverseIsotonic);
    let mut cfg = TwoStageConfig::default_for(Problem::InverseIsotonic, 1 << 13);
    cfg.practical_quantile = Some(h.practical_quantile_for(&model, &cfg, 0.002, 1.5, 5000)?);
    let grid = [0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7];
    let r = h.allocation_experiment(&model, &cfg, &grid, 300)?;
    for (p, v) in r.p_grid.iter().zip(&r.variance) {
        println!("p = {p:.1}  var(d2) = {v:.3e}");
    }
    println!("grid argmin {} vs theoretical {}", r.argmin_p, r.optimal_p);
    Ok(())
}
