//! embedgap fits multivariate Gaussian reference models to feature-embedding
//! datasets and measures how other datasets relate to them.
//!
//! The core quantity is the distribution gap: half the mean squared
//! Mahalanobis distance of a test set from a reference Gaussian, which is
//! the reference cross-entropy up to a constant that depends only on the
//! model. Around it the crate provides:
//!
//! - [`store`]: CSV and binary feature-set ingestion plus parameter-grid
//!   manifests,
//! - [`gaussian`]: model fitting with a scale-aware ridge escalation,
//!   Mahalanobis distances and log-densities,
//! - [`gda`]: the shared-covariance discriminant model and its exactly
//!   equivalent sigmoid linear classifier,
//! - [`gap`]: per-sample gaps, filtered gaps, histogram and scatter exports,
//! - [`pool`]: density / diversity / domain-gap metrics for synthetic pools
//!   on rendering-parameter grids, Fréchet distance between models, and
//!   sub-pool sampling schemes,
//! - [`select`]: a seeded gap-weighted vs uniform selection simulator.
//!
//! All aggregations use fixed reduction orders, so every result is
//! reproducible bit for bit regardless of worker count.

pub mod error;
pub mod gap;
pub mod gaussian;
pub mod gda;
pub mod math;
pub mod pool;
pub mod select;
pub mod store;

pub use error::{Error, Result};
pub use gap::{
    build_report, cross_entropy, distribution_gap, filtered_gap, histogram, per_sample_gaps,
    scatter_export, GapReport, PerSampleGap,
};
pub use gaussian::{GaussianModel, ModelJson};
pub use gda::{
    equivalence_max_deviation, lda_to_sigmoid, posterior_gda, posterior_sigmoid, LdaParams,
    SigmoidClassifier,
};
pub use pool::{
    adjacency_pairs, archangel_grid, builtin_scheme, builtin_schemes, density, diversity,
    frechet_gaussian, pool_domain_gap, read_scheme, sample_subset, AdjacencyPairs,
    DiversityConfig, SubsetScheme,
};
pub use select::{
    mix_seed, select, selection_bias_report, SelectionBias, SelectionConfig, SelectionMode,
};
pub use store::{
    read_binary, read_csv, read_grid_manifest, write_binary, FeatureSet, GridManifest,
    GridParameter,
};
