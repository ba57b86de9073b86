//! Numerical laboratory for critical Hamilton-Jacobi equations with
//! fractional diffusion, u_t + H(grad u) + (-Lap)^s u = 0 on the flat torus.
//!
//! The crate provides:
//! - [`grid`]: periodic lattices, scalar and space-time fields, parabolic
//!   cylinders, oscillation measurements and field file I/O;
//! - [`nonlocal`]: second differences, the fractional Laplacian (spectral
//!   and validated singular-integral quadrature), linear kernel operators
//!   and the extremal operators M+/M-;
//! - [`convolution`]: exact sup/inf envelope regularizations and the
//!   semiconvexity/Lipschitz diagnostics attached to them;
//! - [`evolve`]: monotone split-step solvers for the Hamilton-Jacobi,
//!   Isaacs, advection-diffusion and fractional Burgers equations;
//! - [`regularity`]: oscillation cascades, Hölder exponent fits, the memory
//!   ODE, incremental quotients, the telescoping bootstrap and the shock
//!   monitor;
//! - [`synth`]: deterministic seeded synthetic data for ensembles and
//!   estimator calibration.

pub mod convolution;
pub mod error;
pub mod evolve;
mod fft;
pub mod grid;
pub mod nonlocal;
pub mod regularity;
pub mod synth;

pub use error::{Error, Result};
pub use grid::{
    oscillation, oscillation_spacetime, read_field, write_csv, write_field, FieldData, Grid,
    ParabolicCylinder, ScalarField, SpaceTimeField, TimeWindow,
};
pub use nonlocal::{EllipticityBounds, FractionalOrder, KernelSpec, QuadratureScheme, TailMode};
