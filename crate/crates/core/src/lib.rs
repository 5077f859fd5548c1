//! Exact diagonalization of the quantum Rabi model and the finite-N Dicke model
//! across the superradiance transition.
//!
//! Internally ħ = 1 and Δ = 1 when models are built from ratios; see [`model`] for
//! basis and unit conventions.

pub mod criticality;
pub mod eigensolver;
mod error;
pub mod model;
pub mod observables;
pub mod semiclassics;

pub use error::{Error, Result};
pub use model::{ModelSpec, TruncationConfig};
