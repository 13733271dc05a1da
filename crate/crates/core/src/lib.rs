//! Two-stage ("zoom-in") M-estimation.
//!
//! A fraction `p` of the sampling budget is spent on a global uniform design
//! to get a first estimate `d̂₁`; the rest is sampled in a shrinking window
//! `d̂₁ ± K·n₁^{-γ}` and the same kind of criterion is optimised again. Four
//! problems are covered:
//!
//! * change-point with a jump that fades with the budget (`c₀·n^{-ξ}`),
//! * the inverse of an isotonic regression function at a level `t₀`,
//! * monotone binary classification (inverse isotonic at `1/2`),
//! * the location of the peak of a symmetric unimodal regression function.
//!
//! Next to the estimators the crate ships simulators for the argmin/argmax
//! functionals of drifted two-sided Brownian motion that appear as limit
//! laws, the closed-form scaling constants, and a Monte Carlo harness that
//! measures convergence rates, limit-law fit and budget allocations.
//!
//! ```
//! use twostage::model::ModelSpec;
//! use twostage::seeding::derive_stream;
//! use twostage::two_stage::{run_two_stage, Problem, TwoStageConfig};
//!
//! let model = ModelSpec::default_for(Problem::ChangePoint);
//! let cfg = TwoStageConfig::default_for(Problem::ChangePoint, 4096);
//! let mut rng = derive_stream(7, "doc", 0);
//! let rec = run_two_stage(&model, &cfg, &mut rng).unwrap();
//! assert_eq!(rec.n1 + rec.n2, 4096);
//! assert!((rec.d2_hat - 0.5).abs() < 0.1);
//! ```

pub mod cli;
pub mod error;
pub mod estimators;
pub mod harness;
pub mod ks;
pub mod limit_laws;
pub mod model;
pub mod numerics;
pub mod report;
pub mod seeding;
pub mod two_stage;

pub use error::{Error, Result};

/// Library version embedded into every emitted report.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
