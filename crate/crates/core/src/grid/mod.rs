//! Uniform Cartesian grid driver: slab decomposition, ghost exchange,
//! reductions and physical boundary operators.

mod boundary;
mod decompose;
mod layout;
mod reduce;
mod spec;
mod sync;

pub use boundary::{apply_boundary_local, BoundaryCondition, BoundaryTarget};
pub use decompose::{decompose, Decomposition, Neighbor, Partition, Side, StorageClass, VarStorage};
pub use layout::LocalLayout;
pub use reduce::{reduce_values, ReductionKind, ReductionResult};
pub use spec::{AxisBoundary, GridSpec};
pub use sync::GhostMessage;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum GridError {
    #[error("invalid grid: {0}")]
    InvalidSpec(String),
    #[error("TooManyPartitions: {partitions} slabs over {points} points leaves a slab thinner than the ghost width {ghost}")]
    TooManyPartitions {
        partitions: usize,
        points: usize,
        ghost: usize,
    },
    #[error("MissingTimelevel: radiative boundary needs at least two timelevels (storage slot {slot})")]
    MissingTimelevel { slot: usize },
}
