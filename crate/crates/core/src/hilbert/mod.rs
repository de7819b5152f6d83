//! Finite-dimensional Hilbert-space numerics and the discretized measure spaces
//! and partitions that the frame code integrates over.

mod linalg;
mod measure;
mod partition;

pub use linalg::*;
pub use measure::DiscretizedMeasureSpace;
pub(crate) use measure::check_node_subset;
pub use partition::{
    check_budget, partition_count, partitions_exhaustive, random_partition,
    random_partition_with, Partition, PartitionIter, DEFAULT_ENUMERATION_BUDGET,
};
