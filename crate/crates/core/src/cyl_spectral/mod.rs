//! Model operators on cylinders: indicial spectra, weights, discrete indices.

pub mod index;
pub mod model;
pub mod probe;
pub mod spectrum;
pub mod weights;

pub use model::{ModeBlock, ModelOperator};
pub use probe::{norm_equivalence_probe, shrinking_family, NormRatioReport, TestSection};
pub use spectrum::{
    delta0, exceptional_weights, indicial_spectrum, jump_count, pencil_roots, s3_laplacian_levels,
    s3_scalar_discrete, AsymptoticSpectrum, SpectrumEntry,
};
pub use index::{
    adjoint_kernel_dim, discrete_index, discretize_block, glued_model_additivity, index_additivity_check, model_index,
    AdditivityReport, DiscreteOperator, Domain, IndexReport, Truncation,
};
pub use weights::{simpson, smoothstep, weighted_norm, WeightProfile, WeightSpec};
