//! Solvers and verification tools for the W¹ Hodge boundary value problem
//! `(-Δ + G)φ = α` on the half space, discretized on a periodic strip
//! `T^N_L × [0, X]`: Fourier modes tangentially, finite differences and
//! closed-form mode solutions along the normal.

pub mod bdm;
pub mod error;
pub mod exterior;
pub mod linalg;
pub mod ops;
pub mod oracle;
pub mod solvers;
pub mod strip;
pub mod symbols;

pub use error::{Error, Result};
pub use exterior::{FormField, MultiIndex};
pub use strip::{BoundaryField, ScalarField, StripGrid};
