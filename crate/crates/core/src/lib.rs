//! Mean-field supercurrent and vortex-density evolutions on a periodic box.
//!
//! The crate evolves the vorticity formulation of the incompressible and
//! compressible mean-field models, reconstructs the supercurrent from
//! `(omega, zeta)` with weighted elliptic solves, and provides an explicit
//! characteristic solver for the degenerate parabolic case together with a
//! diagnostics suite.

pub mod cli;
pub mod config;
pub mod degenerate;
pub mod diagnostics;
pub mod elliptic;
pub mod error;
pub mod evolution;
pub mod snapshot;
pub mod fields;
pub mod spectral;

pub use error::{Error, Result};
