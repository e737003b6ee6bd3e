//! Hypergraph change-point detection through adapted cardinality-based
//! gadgets.
//!
//! A weighted hypergraph is reduced to a strongly connected weighted
//! digraph ([`reduction::adapted_cb_gadget`]); the random walk on it yields
//! a symmetrized combinatorial Laplacian ([`spectral`]) whose top
//! eigenvalues embed each snapshot of a dynamic hypergraph. Laplacian
//! anomaly detection ([`lad`]) turns the embedding series into change-point
//! scores, evaluated against ground truth by [`evalharness`].
//!
//! Numeric code is generic over [`Scalar`] (`f32`/`f64`); the aliases below
//! fix the double-precision types used by the pipeline.

pub mod error;
pub mod evalharness;
pub mod hypergraph;
pub mod ingest;
pub mod lad;
pub mod pipeline;
pub mod reduction;
pub mod scalar;
pub mod sparse;
pub mod spectral;
pub mod synthgen;

pub use error::{Error, Result};
pub use scalar::Scalar;

pub type Hypergraph = hypergraph::Hypergraph<f64>;
pub type Hypergraph32 = hypergraph::Hypergraph<f32>;
pub type DirectedGraph = reduction::DirectedGraph<f64>;
pub type UndirectedGraph = reduction::UndirectedGraph<f64>;
pub type RowStochasticMatrix = reduction::RowStochasticMatrix<f64>;
pub type StationaryDistribution = spectral::StationaryDistribution<f64>;
pub type SymmetricLaplacian = spectral::SymmetricLaplacian<f64>;
