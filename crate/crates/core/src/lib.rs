//! Exact-arithmetic toolkit for the dual -1 Hahn polynomials, the quadratic
//! algebra `H` they realize, and the Clebsch-Gordan problem of `sl_{-1}(2)`.
//!
//! Every computation is carried out over arbitrary-precision rationals, so
//! each identity is checked as an exact equality.

pub mod algebra;
pub mod cli;
pub mod dual_rep;
pub mod error;
pub mod exact;
pub mod hahn;
pub mod report;
pub mod sl_minus;
pub mod sweep;

pub use error::{Error, Result};
pub use exact::{parse_rational, RMatrix, Rational};
pub use hahn::HahnParams;
