//! Experiment configuration and the pipeline steps behind the binary.

mod commands;
mod config;
pub mod verify;

pub use commands::{
    align, cmd_compare, cmd_fom, cmd_pod, cmd_rom, projection_identity, read_compare, run_reduced, series_mismatch,
    write_compare, CompareOutput, CompareRow, FomOutput, IdentityReport, PodOutput, RomOutput, Workspace,
    COMPARE_COLUMNS,
};
pub use config::{ExperimentConfig, MeshSource, OutputSettings, PodSettings, RomSettings};

use crate::error::Error;

/// Process exit status for an error.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Config(_)
        | Error::RankExceeded { .. }
        | Error::Boundary(_)
        | Error::Mesh(_)
        | Error::MeshParse { .. } => 2,
        Error::Format { .. } | Error::Io { .. } | Error::SpaceMismatch(_) | Error::TimeGridMismatch(_) => 4,
        _ => 3,
    }
}
