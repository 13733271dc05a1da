//! Inverse of an isotonic regression at a level: the step-function inverse,
//! the switching relation, and the two-stage zoom.

use twostage::estimators::{isotonic_fit, isotonic_inverse, switching_argmin};
use twostage::model::{sample_batch, CurveSpec, DesignSpec, ModelSpec, Window};
use twostage::seeding::derive_stream;
use twostage::two_stage::{run_two_stage, Problem, TwoStageConfig};

fn main() -> twostage::Result<()> {
    let curve = CurveSpec::Logistic {
        location: 0.4,
        scale: 0.2,
    };
    let model = ModelSpec::monotone(curve, 0.6, 0.3)?;
    println!("target d0 = r^-1(0.6) = {:.5}", model.d0);

    let mut rng = derive_stream(3, "iso-example", 0);
    let batch = sample_batch(&model, &DesignSpec::unit(), 2000, 2000, 1, &mut rng)?;
    let fit = isotonic_fit(&batch, &Window::new(0.0, 1.0))?;
    println!("isotonic fit: {} steps", fit.levels.len());
    println!("inverse at 0.6:        {:.5}", isotonic_inverse(&fit, 0.6));
    println!("switching argmin:      {:.5}", switching_argmin(&batch, 0.6)?);

    let cfg = TwoStageConfig::default_for(Problem::InverseIsotonic, 8000);
    let rec = run_two_stage(&model, &cfg, &mut derive_stream(3, "iso-example", 1))?;
    println!("two-stage, n = 8000:   d1 = {:.5}, d2 = {:.5}", rec.d1_hat, rec.d2_hat);
    Ok(())
}
