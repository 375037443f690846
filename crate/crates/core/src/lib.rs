//! Canonical quantization of geodesic motion on Riemannian charts.
//!
//! The crate evaluates ordering-dependent quantum potentials (Weyl, Rivier
//! and the combination 2·Weyl − Rivier), extracts their curvature
//! coefficients in normal coordinates, discretizes the ordered Hamiltonians
//! on grids and compares time-sliced and WKB propagators with direct
//! evolution. See the `examples/` directory for one program per capability.

pub mod cli;
pub mod dsl;
pub mod error;
mod fourier;
pub mod geometry;
pub mod grid;
pub mod ordering;
pub mod propagator;
pub mod units;

pub use error::{Error, Result};
pub use units::Units;
