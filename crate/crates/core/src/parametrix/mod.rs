//! The composite parametrix assembled from the wedge models and a compact
//! solve, and its iterative correction.

pub mod composite;
pub mod partition;
pub mod wedge;

pub use composite::{CompositeParametrix, ErrorNorms, ErrorTerms, NeumannHistory};
pub use partition::{Face, PartitionOfUnity, DEFAULT_THETA};
pub use wedge::WedgeSolver;
