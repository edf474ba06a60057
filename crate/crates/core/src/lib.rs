//! Numerical tools for the averaged-velocity mixing-zone model of two-phase
//! porous-media flow: the double-averaged interface kernel, its Fourier
//! symbols, the regularized interface evolution, reconstruction of the relaxed
//! (ρ, u, m) fields on the mixing zone, and the hull-membership checks.

pub mod error;
pub mod evolution;
pub mod flatlab;
pub mod grid;
pub mod kernel;
pub mod pv;
pub mod quadrature;
pub mod spectral;
pub mod subsolution;

pub use error::{MixError, Result};
pub use grid::GridFunction1D;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");
