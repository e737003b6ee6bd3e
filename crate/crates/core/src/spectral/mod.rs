//! Random-walk spectra of reduced graphs: stationary distributions, Chung's
//! symmetrized combinatorial Laplacian, normalized Laplacians and top-k
//! eigenvalue extraction.

mod eigen;
mod laplacian;
mod stationary;

pub use eigen::{top_k_eigenvalues, top_k_eigenvalues_with, EigenMethod, EigenOptions, SymmetricOperator};
pub use laplacian::{
    combinatorial_laplacian, normalized_laplacian, undirected_normalized_laplacian, LaplacianKind,
    SymmetricLaplacian,
};
pub use stationary::{
    dense_stationary, stationary_distribution, stationary_distribution_with, unit_weight_closed_form,
    StationaryDistribution, StationaryMethod, StationaryOptions,
};
