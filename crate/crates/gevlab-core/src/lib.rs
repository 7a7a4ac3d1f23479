//! Pseudo-spectral laboratory core for the damped-driven two-dimensional
//! Navier-Stokes system in vorticity form on the periodic torus:
//!
//! ```text
//!     d/dt omega + u . grad omega = nu Laplace omega - mu omega + F,
//!     u = grad^perp Laplace^{-1} omega
//! ```
//!
//! The crate provides the spectral transforms and nonlinear term, an
//! integrating-factor SSP-RK3 time stepper, diagnostics that estimate the
//! spatial analyticity radius of a solution from the exponential decay of
//! its Fourier shell spectrum, calculators for the closed-form length-scale
//! and attractor-dimension bounds of the damped system, and twin-run
//! determining-mode experiments.
//!
//! Everything here is deterministic: a fixed configuration (including the
//! RNG seed) reproduces bit-identical trajectories and diagnostics. The
//! crate is `no_std`-compatible (`alloc` required); file formats and the
//! command-line driver live in the companion `gevlab-cli` crate.

#![cfg_attr(not(feature = "std"), no_std)]

extern crate alloc;

pub mod bounds;
pub mod checkpoint;
pub mod diagnostics;
pub mod experiments;
pub mod field;
pub mod fft;
pub mod grid;
pub(crate) mod math;
pub mod norm;
pub mod solver;
pub mod spectral;

pub use field::{Complex64, PhysicalField, SpectralField};
pub use grid::GridSpec;
pub use spectral::{Advection, SpectralOps};
