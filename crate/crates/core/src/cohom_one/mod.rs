//! Cohomogeneity-one metrics q(t)dt² + Σ a_i(t)² σ_i² on (interval) × S³/ℤ_k.

pub mod cartan;
pub mod cylindrify;
pub mod decay;
pub mod exact;
pub mod hopf;
pub mod profile;

pub use cartan::{cartan_curvature, frame_point, reduce_jets, weyl_block, wplus_diag, wplus_reduced, ReducedWplus};
pub use cylindrify::{cylindrify, CEProfile, Cylindrified};
pub use decay::{decay_rate_fit, deviation, DecayFit};
pub use exact::{
    eguchi_hanson_profile, Berger, CompactifiedEguchiHanson, EguchiHanson, FlatBall, FlatCone, FubiniStudy,
    Quotient, RadialProfile, RoundCylinder, RoundS4,
};
pub use hopf::{hopf_chart, pipeline_discrepancy, HopfBox};
pub use profile::{CoframeProfile, Jet, ProfileFn};
