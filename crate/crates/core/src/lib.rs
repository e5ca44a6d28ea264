//! Multi-class imbalanced learning on tabular feature data.
//!
//! The crate provides
//!
//! - CSV ingestion and rating aggregation ([`data`]),
//! - exact k-nearest-neighbor search ([`neighbors`]),
//! - random oversampling, SMOTE, Borderline-SMOTE 1/2 and ADASYN ([`oversample`]),
//! - a Jensen-Shannon audit of how resampling shifts per-class feature
//!   distributions ([`divergence`]),
//! - a from-scratch random forest ([`forest`]) and a stratified repeated
//!   hold-out harness measuring per-class sensitivity ([`evaluation`]),
//! - Gaussian-mixture data generators for experiments ([`datasets`]),
//! - the command-line front end ([`cli`]).
//!
//! Every random decision is driven by an explicit seed.

pub mod cli;
pub mod data;
pub mod datasets;
pub mod divergence;
pub mod error;
pub mod evaluation;
pub mod forest;
pub mod neighbors;
pub mod oversample;
pub mod rng;

pub use data::{aggregate_rating, load_csv, partition, ClassLabel, ClassPartition, FeatureTable, RatingSet};
pub use error::{Error, Result};
pub use neighbors::{NeighborIndex, NeighborSet};
pub use oversample::{plan_balance, BalancePlan, Method, SamplerConfig, SyntheticBatch};
