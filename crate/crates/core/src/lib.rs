//! Numerical laboratory for thin-shell concentration of unconditional
//! convex bodies: exact samplers, Monte Carlo estimators with confidence
//! intervals, a band-limited smoothing kernel with Fourier-inversion tail
//! probabilities, discrete optimal transport and negative Sobolev norms,
//! and Neumann Laplacian spectra on rasterized planar domains.

pub mod bodies;
pub mod cli;
pub mod clt;
pub mod estimators;
pub mod error;
pub mod numeric;
pub mod rng;
pub mod sampler;
pub mod spectral;
pub mod transport;

pub use bodies::{AxisSection, BodyKind, BodySpec};
pub use error::{Error, Result};
pub use sampler::{SampleMatrix, SampleMethod};
