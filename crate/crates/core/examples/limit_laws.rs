//! Simulating the argmin/argmax of drifted two-sided Brownian motion and
//! the closed-form constants that scale them.

use twostage::harness::Harness;
use twostage::limit_laws::{
    changepoint_scale, empirical_quantile, isotonic_scale, mode_scales, DriftShape, DriftSpec, ModeProfile,
    PathGrid,
};

fn main() -> twostage::Result<()> {
    let h = Harness::new(1, 0)?;
    let grid = PathGrid::default();
    for (name, drift) in [
        ("argmin B(v) + |v|", DriftSpec::abs_min()),
        ("argmin B(w) + w^2", DriftSpec::chernoff_min()),
        ("argmax B(h) - h^2", DriftSpec::chernoff_max()),
    ] {
        let s = h.limit_draws(&drift, &grid, 4000)?;
        println!(
            "{name}: 2.5% {:+.3}  50% {:+.3}  97.5% {:+.3}",
            empirical_quantile(&s, 0.025)?,
            empirical_quantile(&s, 0.5)?,
            empirical_quantile(&s, 0.975)?
        );
    }

    let scaled = DriftSpec {
        shape: DriftShape::Quadratic(2.0),
        diffusion: 3.0,
        ..DriftSpec::chernoff_min()
    };
    println!("argmin 3B + 2w^2 is (3/2)^(2/3) = {:.4} times the unit law", scaled.rescaling_factor());

    println!("change-point lambda0 (K=2, sigma=0.25, c0=1, p=1/3, gamma=0.3): {:.4}", changepoint_scale(2.0, 0.25, 1.0, 1.0 / 3.0, 0.3, None));
    println!("isotonic constant (K=1, sigma=0.5, r'=1, p=1/4, gamma=0.2):       {:.4}", isotonic_scale(1.0, 0.5, 1.0, 0.25, 0.2)?);
    let profile = ModeProfile {
        m_d0: 1.0,
        m_d0_plus_b: (-0.1f64).exp(),
        m_prime_d0_plus: -1.0,
        m_prime_d0_plus_b: -(-0.1f64).exp(),
        sigma: 0.25,
    };
    let m = mode_scales(1.0, &profile, 0.25, 0.25)?;
    println!(
        "mode: one-stage (a/c)^(2/3) = {:.4}, two-stage constant = {:.4}",
        m.one_stage_constant(),
        m.two_stage_constant
    );
    Ok(())
}
