//! Clustering of Dempster-Shafer evidence into event-specific subsets.
//!
//! Pieces of evidence (simple support functions) are assigned to `q` clusters
//! so that the metaconflict of the partition is minimal. The pairwise weight
//! of conflict between two pieces of evidence becomes the interaction of an
//! antiferromagnetic Potts spin system, which is minimized by mean-field
//! annealing.
//!
//! Besides the solver the crate carries the tools used to check it:
//!
//! - [`oracle`]: exhaustive minimization over all partitions of small instances,
//! - [`graph`]: the dual spin/bond representation and exact enumeration of its
//!   distribution identities,
//! - [`benchmark`]: the `2^K - 1` evidence benchmark family and its metrics.

pub mod benchmark;
pub mod error;
pub mod evidence;
pub mod graph;
pub mod io;
pub mod oracle;
pub mod partition;
pub mod potts;
pub mod rng;

pub use error::{Error, Result};
pub use evidence::{
    belief, cluster_conflict, combine, linearized_conflict, metaconflict, pairwise_conflict,
    plausibility, FocalSet, Frame, MassFunction, SimpleSupport,
};
pub use partition::Partition;
pub use potts::{anneal, AnnealConfig, ClusterAssignment, InteractionMatrix, MeanFieldState};
