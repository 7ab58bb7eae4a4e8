//! Scene files, runs, sweeps and CSV reports for the `asearch` tool.

pub mod config;
pub mod error;
pub mod record;
pub mod report;
pub mod scene;
pub mod sweep;

pub use config::{RawConfig, SceneConfig, SceneKind};
pub use error::{CliError, CliResult};
pub use record::{simulate, RunRecord, RunRow, Snapshot};
pub use scene::Scene;
