//! Numerical laboratory for monostable equations with nonlocal dispersal,
//! time delay and a heat-kernel smoothed birth term:
//!
//! ```text
//! u_t - J*u + u + d(u) = \int f_beta(y) b(u(t - tau, x - y)) dy
//! ```
//!
//! The crate computes critical wave speeds, traveling-wave profiles, delayed
//! nonlocal Cauchy evolutions, linearized Fourier solutions, and measures
//! the decay of perturbations around fronts.

pub mod error;
pub mod evolution;
pub mod fit;
pub mod kernels;
pub mod lab;
pub mod linearized;
pub mod banded;
pub mod model;
pub mod monostable;
pub mod profile;
pub mod quadrature;
pub mod stencil;
pub mod wavespeed;

pub use error::{Error, Result};
