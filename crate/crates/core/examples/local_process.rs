//! Variance of the difference of the local second-stage change-point
//! processes centered at the stage-one estimate and at the truth.

use twostage::harness::{Harness, Prop33Params};

fn main() -> twostage::Result<()> {
    let h = Harness::new(9, 0)?;
    let params = Prop33Params::default();
    let r = h.prop33_experiment(&params, &[1 << 12, 1 << 14], 1000)?;
    for i in 0..r.n_grid.len() {
        println!(
            "n = {:>6}: Var(T) = {:.4}  skewness {:+.3}",
            r.n_grid[i], r.variance[i], r.skewness[i]
        );
    }
    println!("limit variance {:.4}", r.pi0_sq);
    Ok(())
}
