//! Does the standardized second-stage error look like its limit law?

use twostage::harness::Harness;
use twostage::ks::ks_critical_value;
use twostage::limit_laws::PathGrid;
use twostage::model::ModelSpec;
use twostage::two_stage::{Problem, TwoStageConfig};

fn main() -> twostage::Result<()> {
    let h = Harness::new(4, 0)?;
    for problem in [Problem::ChangePoint, Problem::InverseIsotonic] {
        let model = ModelSpec::default_for(problem);
        let cfg = TwoStageConfig::default_for(problem, 1 << 13);
        for mult in [1.0, 2.0] {
            let r = h.dist_check(&model, &cfg, 1000, 1000, mult, &PathGrid::default())?;
            println!("{problem:<17} scale x{mult}: KS = {:.4}", r.ks_stat);
        }
    }
    println!("1% critical value at 1000 vs 1000: {:.4}", ks_critical_value(0.01, 1000, 1000));
    Ok(())
}
