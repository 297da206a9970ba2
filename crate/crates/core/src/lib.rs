//! Pseudo-spectral solvers for the low Mach number limit of the compressible primitive
//! equations on the periodic slab T² × 2T.
//!
//! Fields live in Fourier space throughout ([`field`]); [`spectral::Spectral`] holds the
//! FFT plans used inside nonlinear products.

pub mod acoustic;
pub mod cpe;
pub mod error;
pub mod experiments;
pub mod field;
pub mod grid;
pub mod limit_pe;
pub mod oscillation;
pub mod params;
pub mod projections;
pub mod random;
pub mod snapshot;
pub mod spectral;

pub use error::{Error, Result};
pub use field::{ScalarField2, ScalarField3, VectorField2, VectorField3};
pub use grid::{sg, Grid, Lattice};
pub use params::{derive_constants, DerivedConstants, PhysicalParams};
pub use spectral::Spectral;
