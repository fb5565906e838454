//! Computational toolkit for l∞ width bounds of submanifolds of `R^N`.
//!
//! The crate is organized around one pipeline: exact averages over the
//! symmetry group of the cube ([`sgnperm`]) feed kinematic intersection
//! bounds ([`kinsep`]); a periodic foam built from level sets of the cube
//! eigenfunction ([`foam`]) provides small separators; intersecting posed
//! copies of the foam yields separator towers whose nerve complexes carry
//! displacement-bounded maps. A second, codimension-1 pipeline
//! ([`hyperwidth`]) produces width certificates for closed surfaces in
//! `R^3` from a relative isoperimetric argument and a three-plane sweep.
//!
//! Everything is seeded and deterministic: identical inputs (including
//! seeds) produce identical outputs, independent of thread count.

pub mod error;
pub mod foam;
pub mod geom;
pub mod hyperwidth;
pub mod io;
pub mod kinsep;
pub mod meshgen;
pub mod report;
pub mod sgnperm;
pub mod tol;

pub use error::Error;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;
