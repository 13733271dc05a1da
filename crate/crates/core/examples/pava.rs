//! Pool adjacent violators and the step functions built from it.

use twostage::estimators::{isotonic_inverse, pava, StepFunction};

fn main() -> twostage::Result<()> {
    let y = [1.0, 3.0, 2.0, 2.0, 5.0, 4.0];
    let w = [1.0, 1.0, 2.0, 1.0, 1.0, 3.0];
    println!("data    {y:?}");
    println!("weights {w:?}");
    println!("fit     {:?}", pava(&y, &w));

    let f = StepFunction::new(vec![0.0, 0.2, 0.5, 1.0], vec![0.1, 0.4, 0.9])?;
    for x in [0.0, 0.19, 0.2, 0.7, 1.0] {
        println!("f({x}) = {}", f.eval(x));
    }
    println!("sup{{d : f(d) <= 0.4}} = {}", isotonic_inverse(&f, 0.4));
    println!("{}", serde_json::to_string(&f)?);
    Ok(())
}
