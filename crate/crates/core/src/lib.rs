//! Numerical toolkit for a second-order difference operator on the punctured
//! lattice `Z \ {0, 1}` with complex transition (impulse) conditions gluing the
//! two half-lattices. Provides solution propagation, Weyl-disk construction of
//! square-summable solutions, the Green-kernel inverse, Hermiticity
//! diagnostics, and truncated-spectrum computation.

pub mod config;
pub mod csum;
pub mod error;
pub mod lattice;
pub mod linalg;
pub mod operators;
pub mod recurrence;
pub mod report;
pub mod runs;
pub mod spectrum;
pub mod verify;
pub mod weyl;

pub use error::Error;

/// Default absolute tolerance for residual checks.
pub const ABS_TOL: f64 = 1e-10;
/// Default relative tolerance for residual checks.
pub const REL_TOL: f64 = 1e-8;

pub type Result<T> = std::result::Result<T, Error>;
