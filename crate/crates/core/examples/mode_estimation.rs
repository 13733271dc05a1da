//! Locating the peak of a regression function with the binned (shorth)
//! criterion: cusp vs smooth peaks, uniform vs triangular zoom.

use twostage::model::{CurveSpec, ModelSpec, SymmetricDensity};
use twostage::numerics::rmse;
use twostage::seeding::derive_stream;
use twostage::two_stage::{run_two_stage, Problem, SecondStageDesign, TwoStageConfig};

fn run(model: &ModelSpec, cfg: &TwoStageConfig, label: &str) -> twostage::Result<()> {
    let errs = (0..200)
        .map(|rep| run_two_stage(model, cfg, &mut derive_stream(21, label, rep)).map(|r| r.d2_hat - model.d0))
        .collect::<twostage::Result<Vec<_>>>()?;
    println!("{label:<28} rmse {:.4}", rmse(&errs));
    Ok(())
}

fn main() -> twostage::Result<()> {
    let n = 1 << 14;
    let cusp = ModelSpec::unimodal(CurveSpec::ExpCusp { rate: 1.0 }, 0.5, 0.25, 0.1);
    run(&cusp, &TwoStageConfig::default_for(Problem::Mode, n), "cusp, uniform zoom")?;

    let smooth = ModelSpec::unimodal(CurveSpec::QuadraticCap { curvature: 4.0 }, 0.5, 0.1, 0.2);
    let base = TwoStageConfig {
        b: 0.2,
        ..TwoStageConfig::default_for(Problem::Mode, n)
    };
    run(&smooth, &base, "smooth, uniform zoom")?;
    let tri = TwoStageConfig {
        second_stage_design: SecondStageDesign::Symmetric {
            density: SymmetricDensity::Triangular,
        },
        ..base
    };
    run(&smooth, &tri, "smooth, triangular zoom")?;
    Ok(())
}
