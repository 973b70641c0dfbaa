//! Text format, CSV, configuration, parallel sweeps and the command line for `flagforge-core`.

pub mod cli;
pub mod config;
pub mod curve;
pub mod sweep;
pub mod text;

pub use curve::{parse_csv, write_csv};
pub use sweep::{run_sweep, SweepResult};
pub use text::{parse_circuit, print_circuit};
