//! Operator norms `ℓ_{p*} → ℓ_q` of Gaussian random matrices `G = (a_ij g_ij)`
//! with an arbitrary variance profile `(a_ij)`.
//!
//! The crate samples realizations, computes their operator norms, evaluates
//! the known upper bounds and two-sided comparators term by term, and checks
//! them against Monte Carlo estimates.
//!
//! Conventions used everywhere:
//! * profiles hold standard deviations `a_ij`, not variances;
//! * an `m × n` matrix maps `ℝⁿ` (with ℓ_{p*}) into `ℝᵐ` (with ℓ_q);
//! * `log` is the natural logarithm.

pub mod bounds;
pub mod corpus;
pub mod csvfmt;
pub mod error;
pub mod gaussian;
pub mod harness;
pub mod matrix;
pub mod montecarlo;
pub mod pqnorm;
pub mod profiles;
pub mod quad;
pub mod sampling;

pub use error::{Error, Result};
pub use matrix::Matrix;
pub use profiles::{make_diagonal, make_iid, make_tensor, NormPair, VarianceProfile};
pub use sampling::SampleKey;
