//! Simulation and verification toolkit for binary search trees built from
//! Mallows permutations.
//!
//! The crate samples finite, one-sided and two-sided Mallows permutations,
//! builds their binary search trees and two-sided "redwood" extensions, and
//! measures those trees under four topologies: local ball censuses, balls at
//! the root, the correspondence distortion against the unit interval, and
//! subtree-size ratios. The [`stats`] module carries the statistical tests and
//! exact small-size oracles; [`verify`] packages everything into reproducible
//! suites that emit [`TestReport`]s.

pub mod distributions;
pub mod error;
pub mod limits;
pub mod permutations;
pub mod rng;
pub mod stats;
pub mod trees;
pub mod verify;

pub use distributions::{GeomVariant, Geometric, PartitionSample};
pub use error::{Error, Result};
pub use limits::{BallSignature, CensusResult, SpacedSequence, SubtreeSizeMap};
pub use permutations::{OneSidedStream, PermWindow, RecordRepresentation, TwoSidedTriplet};
pub use rng::SimRng;
pub use stats::{EmpiricalDist, TestReport};
pub use trees::{BinaryTree, NodeId, RedwoodTree, SpineDecomposition};
