//! Coordinate-chart curvature: metric → Christoffel → Riemann → Weyl → Λ± blocks.

pub mod chart;
pub mod curvature;
pub mod invariance;
pub mod io;
pub mod tensor;

pub use invariance::{conformal_deviation, interior_nodes, random_factors, wplus_e2_at, SmoothFactor};
pub use chart::{conformal_rescale, ChartMetric4, Grid4};
pub use curvature::{
    christoffel, e2_normalized, orthonormal_frame, pointwise_norm, riemann_from_christoffel,
    riemann_with_order, self_dual_parts_at, weyl_decompose, wminus_project, wplus_project,
    Christoffel, CurvatureBundle, CurvatureEvaluator, PerturbationField, PointCurvature,
    RiemannOrder, WplusField,
};
