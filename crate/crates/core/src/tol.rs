//! Default tolerances shared by the batteries.
//!
//! Every report records the tolerances it used, so these are defaults rather
//! than hidden constants.

/// Closed-form evaluations (no grid involved).
pub const CLOSED_FORM: f64 = 1e-9;

/// Finite maxima over finite sets, where only rounding separates both sides.
pub const EXACT: f64 = 1e-12;

/// Quantities read off a grid or interpolated from one.
pub const GRID: f64 = 1e-6;

/// Membership in P(f): f - q at most this much.
pub const MEMBERSHIP: f64 = 10.0 * GRID;

/// Density infima with an explicit witness.
pub const DENSITY: f64 = 1e-6;

/// Relative slack of the midpoint convexity test.
pub const CONVEXITY_REL: f64 = 1e-8;

/// Two points closer than this (sup norm) are the same point.
pub const DUPLICATE: f64 = 1e-12;

/// Projection iteration stops once the certificate bound drops below this.
pub const PROJECTION_STOP: f64 = 1e-10;

/// Default seed for every randomized sampling step.
pub const DEFAULT_SEED: u64 = 42;
