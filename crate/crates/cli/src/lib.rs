//! Experiment runner: TOML specs in, CSV/JSON tables out, plus the
//! replication matrix.

pub mod output;
pub mod replicate;
pub mod run;
pub mod spec;

pub use run::{run, RunError, RunResult};
pub use spec::{ExperimentSpec, Format, SpecError};

/// Process exit codes.
pub mod exit {
    pub const PASS: i32 = 0;
    pub const FAIL: i32 = 1;
    pub const ERROR: i32 = 2;
}
