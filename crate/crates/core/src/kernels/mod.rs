//! Backstepping kernels on the triangle `{0 <= x <= y <= L}`: the controller
//! kernel `k`, the observer kernel `p` and the inverse kernel `l`, together
//! with the gains, transforms and cache built on them.

pub mod cache;
pub mod collocation;
pub mod gains;
pub mod grid;
pub mod legendre;
pub mod residuals;
pub mod table;
pub mod transform;

pub use cache::{cache_read, cache_write};
pub use gains::{extract_feedback_gain, extract_observer_gain, GainVectors};
pub use grid::TriangleGrid;
pub use residuals::kernel_residuals;
pub use table::{solve_kernel, solve_kernel_with, KernelKind, KernelTable, ResidualReport, SolveOptions};
pub use transform::{forward_transform, inverse_transform};
