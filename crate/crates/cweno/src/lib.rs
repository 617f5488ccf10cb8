//! Finite-volume solver for 1D scalar non-local conservation laws
//!
//! This crate implements central WENO (CWENO) schemes of orders 3, 5 and 7
//! for equations of the form
//!
//! ```text
//!     ∂_t ρ + ∂_x ( g(ρ) · v(ρ * w_η) ) = 0,
//! ```
//!
//! where the flux velocity depends on a convolution of the solution with a
//! compactly supported kernel `w_η`. The building blocks are:
//!
//! * [`quadrature`] — right-Radau rules on `[0,1]` used for initial cell
//!   averages and the convolution terms,
//! * [`reconstruction`] — per-cell CWENO polynomials built from cell
//!   averages with nonlinear smoothness weights,
//! * [`limiter`] — the linear scaling limiter that forces reconstructions
//!   into prescribed global bounds while keeping cell means,
//! * [`model`] — the non-local traffic and sedimentation models together
//!   with their kernels and the norm constants entering the CFL conditions,
//! * [`spatial`] — the semi-discrete right-hand side (ghost cells,
//!   convolution velocities, upwind flux, flux differences),
//! * [`timestep`] — explicit one-step and two-step (SSP) Runge-Kutta
//!   integrators plus step-size rules,
//! * [`harness`] — experiment presets, error norms, convergence tables and
//!   maximum-principle audits.
//!
//! All computations are deterministic and serial; identical inputs produce
//! bit-identical outputs.

pub mod error;
pub mod grid;
pub mod harness;
pub mod limiter;
mod linalg;
pub mod model;
pub mod quadrature;
pub mod reconstruction;
pub mod spatial;
pub mod timestep;

pub use error::{Error, Result};
pub use grid::{Boundary, CellAverages, Grid};
