//! Numerical model of image storage in a diffusing atomic vapor.
//!
//! An object in the front focal plane of a 4f imaging system produces its
//! Fraunhofer pattern in the transform plane. That pattern is written into the
//! Raman coherence of a vapor cell, spreads under diffusion, and is read back
//! and imaged by the second lens. The crate covers each stage:
//!
//! - [`field`]: sampling grids, complex fields, inner products.
//! - [`patterns`]: slit and artificial 1D patterns, 2D objects, PGM masks.
//! - [`optics`]: ideal-lens Fourier transforms between the three planes.
//! - [`diffusion`]: storage mapping, Green/spectral/finite-difference
//!   diffusion, and the closed-form image-plane decay law.
//! - [`analysis`]: fidelity, dark-spot tracking, point probes, dark-region
//!   checks.
//!
//! All quantities are SI. Amplitudes (`C`, the stored coherence) carry no
//! physical unit; only ratios and shapes are meaningful.

// `!(x > 0.0)` guards are meant to reject NaN too
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod diffusion;
mod error;
pub mod field;
pub mod optics;
pub mod patterns;
pub mod pgm;
mod spectral;

pub use error::{Error, Result};
pub use field::{Axis, ComplexField, GridSpec, Plane};

pub use num_complex::Complex64;
