//! Exact recovery in the binary asymmetric stochastic block model.
//!
//! The crate samples `SBM(n, α1, α2, β)` graphs, evaluates the
//! information-theoretic threshold and the degree-profile cloud geometry,
//! solves the symmetric and asymmetric SDP relaxations with a dense
//! splitting solver, and builds the dual certificate for the asymmetric
//! relaxation. [`harness`] ties these together into seeded Monte Carlo
//! experiments and figure data.

pub mod certificate;
pub mod error;
pub mod graph;
pub mod harness;
pub mod linalg;
pub mod sbm;
pub mod sdp;
pub mod threshold;

pub use error::{Error, Result};
pub use graph::{
    best_swap, degree_profile, edge_counts, edge_counts_for, signed_degrees, swap_delta,
    z_objective, BestSwap, Community, DegreeProfile, EdgeCounts, LabeledGraph, Labeling,
    ModelParams,
};
pub use linalg::Matrix;
pub use sbm::{sample, trial_seed, Assignment, SampleConfig};
