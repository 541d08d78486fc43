//! Numerical gluing of anti-self-dual conformal structures.
//!
//! Modules follow the pipeline: chart curvature, reduced cohomogeneity-one
//! geometry, cylindrical-end spectral theory, neck gluing, and the gauge-fixed
//! Newton corrector. `cli_reports` drives them from configuration files.

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod error;
pub mod quad;
pub mod stencil;

pub mod cli_reports;
pub mod cohom_one;
pub mod cyl_spectral;
pub mod frame_curvature;
pub mod ift_solver;
pub mod neck_glue;

pub use error::{Error, Result};
