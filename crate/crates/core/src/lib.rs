//! Numerical toolkit for symmetrically self-dual pairings on ℝᵈ.
//!
//! A space is ℝᵈ with a symmetric matrix M defining ⌊b,c⌋ = bᵀMc, the
//! quadratic form q(b) = ½⌊b,b⌋ and a norm. On top of that the crate samples
//! convex functions on grids and checks, point by point, the inequalities
//! tying q-positive sets to their convex representatives.

pub mod catalog;
pub mod convex;
pub mod dual;
pub mod error;
pub mod fitzpatrick;
pub mod grid;
pub mod io;
pub mod linalg;
pub mod monotone;
pub mod numeric;
pub mod positivity;
pub mod report;
pub mod ssd;
pub mod suites;
pub mod tol;

pub use dual::{make_dual, DualSsd};
pub use error::{Error, Result};
pub use grid::GridSpec;
pub use report::{Check, Status, Summary, VerifyReport};
pub use ssd::{make_ssd, NormSpec, ProductNorm, SsdSpace};
