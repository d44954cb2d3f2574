//! Semi-supervised classification of time series on similarity graphs.
//!
//! A dataset of labeled and unlabeled series is turned into a pairwise
//! [`distance::DistanceMatrix`], then into a self-tuned Gaussian
//! [`graph::SimilarityGraph`] and its normalized Laplacian. Four classifiers
//! in [`solvers`] propagate the few known labels over that graph, and
//! [`harness`] runs whole experiment grids with on-disk distance caching.
//!
//! ```
//! use tsgraph::dataset::Dataset;
//! use tsgraph::distance::{pairwise_distance_matrix, DistanceKind};
//! use tsgraph::graph::{self_tuned_graph, sym_normalized_laplacian};
//! use tsgraph::solvers::{linear_system_classify, LabelVector, LinearSystemParams};
//! use tsgraph::dataset::Label;
//!
//! let records = vec![
//!     ("a".to_string(), vec![0.0, 0.1, 0.0]),
//!     ("a".to_string(), vec![0.1, 0.0, 0.1]),
//!     ("b".to_string(), vec![3.0, 3.1, 3.0]),
//!     ("b".to_string(), vec![3.1, 3.0, 2.9]),
//! ];
//! let data = Dataset::from_records("toy", records)?;
//! let d = pairwise_distance_matrix(&data, DistanceKind::Dtw)?;
//! let graph = self_tuned_graph(&d, 1)?;
//! let lap = sym_normalized_laplacian(&graph)?;
//! let f = LabelVector::from_pairs(4, &[(0, Label::Negative), (2, Label::Positive)])?;
//! let out = linear_system_classify(&lap, &f, &LinearSystemParams::default())?;
//! assert_eq!(out.labels[1], Label::Negative);
//! assert_eq!(out.labels[3], Label::Positive);
//! # Ok::<(), tsgraph::Error>(())
//! ```

// Parameter checks are written as `!(x > 0.0)` so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod dataset;
pub mod distance;
pub mod error;
pub mod graph;
pub mod harness;
pub mod solvers;
pub mod spectral;

pub use error::{Error, Result};
