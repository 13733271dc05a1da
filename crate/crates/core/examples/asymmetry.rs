//! With an asymmetric peak the binned mode estimator is consistent for a
//! shifted point, not for the mode.

use twostage::harness::{asymmetric_target, Harness};
use twostage::model::{CurveSpec, ModelSpec};

fn main() -> twostage::Result<()> {
    let h = Harness::new(6, 0)?;
    let model = ModelSpec::unimodal(CurveSpec::ExpCusp { rate: 1.0 }, 0.5, 0.25, 0.1).with_asymmetry(2.0, 1.0);
    let r = h.asymmetry_bias_experiment(&model, &[1 << 12, 1 << 14], 200)?;
    for (n, m) in r.n_grid.iter().zip(&r.mean_d1) {
        println!("n = {n:>6}: mean d1 = {m:.5}");
    }
    println!("d* = {:.5}, mode = {}", asymmetric_target(0.5, 2.0, 1.0, 0.1), model.d0);
    Ok(())
}
