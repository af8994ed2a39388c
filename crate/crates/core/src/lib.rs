//! Graphon estimation with node features.
//!
//! The crate estimates the edge-probability matrix of an exchangeable random
//! graph by neighborhood smoothing, where node neighborhoods are chosen by a
//! dissimilarity that mixes adjacency-row structure with node-feature
//! structure. It also carries the simulation models used to test the
//! estimator, the USVT and sorting-and-smoothing baselines, cross-validation
//! for the mixing weight, Kendall-tau feature screening, and evaluation
//! metrics (MSE/MAE, paired t-tests, leave-one-out link prediction, ROC/AUC).
//!
//! Everything here is `no_std` with `alloc`. File formats, configuration and
//! the experiment harness live in the `fans` crate.

#![no_std]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod baselines;
pub mod dissimilarity;
pub mod error;
pub mod estimator;
pub mod evaluation;
pub mod graphon;
pub mod matrix;
pub mod rng;
pub mod selection;
pub mod special;

pub use error::{Error, Result};
pub use matrix::{AdjacencyMatrix, FeatureMatrix, ProbabilityMatrix, SquaredDissimilarityMatrix};
