//! Geometry, clusters, drives and the Hamiltonians they generate.

mod geometry;
mod hamiltonian;
mod offcluster;
mod partition;
mod schedule;

pub use geometry::{LatticeGeometry, Metric};
pub use hamiltonian::{build_hamiltonian, embedding, truncate_hamiltonian, Hamiltonian};
pub use offcluster::{
    exact_offcluster_norm, geometric_constant, gershgorin_check, inter_cluster_block, offcluster_norm_bound,
    OffClusterNorm,
};
pub use partition::{BlockGrid, ClusterPartition};
pub use schedule::{CouplingSchedule, Segment};
