//! Gluing two cylindrical-end bodies along a neck of length 2l.

pub mod body;
pub mod config;
pub mod residual;
pub mod transversal;

pub use body::{detect_flag, Body};
pub use config::{
    alpha, attach_bodies, cutoff_jet, cutoff_metric, glue_flag, neck_weight, weight_bound, weight_profile, GlueGrid,
    GlueSpec, GluedConfig, NeckWeight,
};
pub use residual::{residual_report, residual_row, ResidualReport, ResidualRow, RESIDUAL_FLOOR};
pub use transversal::{
    build_transversal, constraint_nullspace, gram_condition, kernel_bases, min_sv_probe, min_sv_row, neck_kernel,
    null_basis, BodyKernel, ConstraintKind, KernelBases, SvRow, TransversalOptions, TransversalSpec,
};
