//! Configuration files, command dispatch, sweeps and report artifacts.

pub mod config;
pub mod report;
pub mod run;

pub use config::{builtin_body, model_from_name, Command, OneOrMany, Params, RunConfig, BODIES, PROFILES};
pub use report::{sha256_hex, ArtifactWriter, Column, Manifest, Schema};
pub use run::{
    exit_code, run, sweep_table, RunOutcome, SweepReport, SweepRow, SweepSlope, EXIT_DIVERGENCE, EXIT_FAILURE,
    EXIT_INCONCLUSIVE, EXIT_OK, EXIT_VALIDATION,
};
