//! Centralized numeric tolerances.
//!
//! Three regimes cover every check in the crate:
//!
//! * exact algebraic identities verified in floating point,
//! * geometric predicates (sidedness, degeneracy detection),
//! * Monte Carlo estimates accepted within a multiple of the standard error.

/// Identities that are exact in real arithmetic (group averages, area
/// additivity) and only accumulate rounding over at most a few million
/// f64 operations.
pub const EXACT_IDENTITY: f64 = 1e-9;

/// Geometric predicate cutoff: distances below this are treated as
/// degenerate contact (on-plane vertices, grazing segments, zero-area
/// triangles).
pub const PREDICATE: f64 = 1e-12;

/// Upper-bound checks derived from Cauchy–Schwarz admit this much slack
/// over the analytic bound.
pub const BOUND_SLACK: f64 = 1e-12;

/// Monte Carlo acceptance half-width, in standard errors.
pub const MC_SIGMAS: f64 = 4.0;

/// Unit-vector and orthonormality gate on caller-supplied data. Inputs
/// farther than this from normalized are rejected, not repaired.
pub const INPUT_UNIT: f64 = 1e-10;

/// Orthonormal-basis gate (pairwise dot products and norms).
pub const INPUT_ORTHO: f64 = 1e-12;

/// Relative tolerance for gradient and eigenfunction self-checks against
/// central finite differences.
pub const FIELD_SELF_CHECK: f64 = 1e-4;

/// Magnitude of the seeded jitter translation applied before lattice or
/// grid constructions to restore transversality.
pub const JITTER: f64 = 1e-6;

/// Maximum retries of the jitter-and-retry degeneracy policy.
pub const JITTER_RETRIES: usize = 5;
