//! Config-driven commands behind the `kdv-backstep` binary.

pub mod commands;
pub mod config;
pub mod manifest;
pub mod verify;

pub use commands::{cmd_simulate, cmd_solve_kernels, cmd_verify, exit_code, CommandOptions};
pub use config::{load_config, parse_config, render_config};
pub use manifest::{CheckOutcome, RunManifest};
