//! Optimal weak parallelogram constants for `L^p` spaces.
//!
//! A Banach space satisfies the *lower* weak parallelogram law with exponent
//! `r` and constant `C` (r-LWP(C)) when
//!
//! ```text
//! ‖x + y‖^r + C‖x − y‖^r ≤ 2^{r−1}(‖x‖^r + ‖y‖^r)   for all x, y,
//! ```
//!
//! and the *upper* law (r-UWP(C)) when the inequality is reversed. This crate
//! classifies the exponent pairs `(p, r)` for which `L^p` satisfies either law,
//! computes the optimal constants, and checks the surrounding inequalities
//! (Clarkson, Hanner, the Pythagorean inequalities under Birkhoff-James
//! orthogonality, and the von Neumann-Jordan and James constant bounds) on
//! seeded random vectors in finite-dimensional `ℓ^p`.

pub mod derived;
pub mod error;
pub mod output;
pub mod params;
pub mod sampling;
pub mod scalar;
pub mod search;
pub mod solver;
pub mod suite;
pub mod vectors;

pub use error::{Error, Result};
pub use params::Params;
pub use solver::{
    classify, constant_bounds, dual_transform, minimize_h, optimal_constant, ConstantResult,
    DualConvention, Law, LawClassification,
};
pub use vectors::LpVector;
