//! Numerical laboratory for spatial search by continuous-time quantum walk.
//!
//! The walk Hamiltonian `H` encodes a graph with top eigenvalue 1; the search
//! Hamiltonian is the rank-one perturbation `H_search = |w><w| + r H`. This
//! crate builds the graph families, extracts the spectral parameters that
//! govern the search (the weighted sums `S_k`, the overlap `epsilon` and the
//! gaps), solves the secular equation of the perturbed spectrum exactly, and
//! cross-checks the resulting closed-form amplitude curves against dense
//! diagonalization.

pub mod config;
pub mod error;
pub mod experiments;
pub mod graph;
pub mod predictor;
pub mod rank_one;
pub mod report;
pub mod roots;
pub mod spectra;

pub use error::Error;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

/// Dense matrices above this order are rejected by the dense code paths;
/// larger instances must go through the grouped closed forms.
pub const DENSE_CAP: usize = 4096;
