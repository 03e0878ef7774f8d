//! Spectral solver for steady traveling waves on a viscous fluid layer with a
//! free upper surface and a Navier-slip bottom.
//!
//! The horizontal directions are periodic (period `L`, Fourier modes) and the
//! vertical direction `[0, b]` is resolved with Chebyshev–Gauss–Lobatto
//! collocation. Every linear problem decouples by horizontal frequency, so the
//! heavy lifting is a batch of small dense solves that runs in parallel when
//! the `parallel` feature (on by default) is enabled.
//!
//! Layers, bottom up:
//!
//! * [`spectral`]: grid, transforms, Chebyshev operators, discrete norms.
//! * [`bvp`]: the per-frequency two-point problems (slip, no-slip, adjoint).
//! * [`symbols`]: the surface symbols `m` and `rho` and their diagnostics.
//! * [`surface`]: the compatibility functional, the free surface and the full
//!   linear solve.
//! * [`geometry`]: flattening map, forcing recipes, slip laws and the
//!   nonlinear residual.
//! * [`newton`]: fixed-point and Newton iterations, the slip-limit sweep.
//! * [`sampling`]: seeded random fields used by tests, benches and the CLI.

pub mod bvp;
pub mod error;
pub mod geometry;
pub mod newton;
pub mod parallel;
pub mod sampling;
pub mod spectral;
pub mod surface;
pub mod symbols;

pub use error::{Error, Result};
pub use num_complex::Complex64;
