//! Experiment harness for quantum relax-and-round: file formats, sweeps,
//! timing, result emission and the `qrr` command-line interface.

pub mod cli;
pub mod error;
pub mod formats;
pub mod results;
pub mod sweep;
pub mod timing;

pub use error::{BenchError, Result};
pub use results::{emit, Format, InstanceKey, ResultRow};
pub use sweep::{run_sweep, AngleMode, Experiment, SweepConfig};
