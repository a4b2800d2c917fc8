//! Closure learning with a series-parallel physics-informed network system,
//! and a conservative WENO-Z finite-difference Euler solver that consumes the
//! learned closure.
//!
//! The crate is organised bottom-up:
//!
//! - [`autodiff`] and [`net`]: a dense-network engine with forward-mode input
//!   derivatives and reverse-over-forward parameter gradients.
//! - [`closure`]: analytic target closures and the neural closure adapter.
//! - [`losses`]: physics-informed loss terms.
//! - [`train`]: the constructor (multi-case training), the data-driven
//!   baseline and closure evaluation.
//! - [`solver`]: the applicator (WENO-Z, Lax–Friedrichs splitting, SSP-RK3),
//!   the exact Riemann solver and an RK4 ODE integrator.
//! - [`cases`]: the compiled-in case registry, training data and error metrics.

pub mod autodiff;
pub mod cases;
pub mod closure;
mod error;
pub mod jsonfmt;
pub mod losses;
pub mod net;
pub mod solver;
pub mod train;

pub use error::{Error, Result};

/// Library version recorded in run manifests.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
