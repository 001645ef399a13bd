//! Output-feedback boundary stabilization of the Korteweg-de Vries equation
//! `u_t + u_x + u_xxx + u u_x = 0` on `[0, L]` by backstepping.
//!
//! The pieces, bottom up:
//!
//! - [`kernels`] solves the gain-kernel equations and extracts the feedback
//!   and output-injection gains;
//! - [`fdm`] holds the implicit finite-difference step;
//! - [`cloop`] marches plant and observer together under the feedback law;
//! - [`analysis`] computes norms, Lyapunov constants and decay fits;
//! - [`cli`] wires everything to config files, CSV output and the checks.

pub mod analysis;
pub mod cli;
pub mod cloop;
pub mod error;
pub mod fdm;
pub mod kernels;

pub use error::{Error, Result};
