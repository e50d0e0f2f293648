//! Altitude-aware coverage control for a swarm of downward-looking
//! sensing nodes over a convex planar region.
//!
//! Each node senses a disk whose radius grows with altitude while its
//! coverage quality drops. The swarm is partitioned into cells by best
//! available quality, and every node ascends the total coverage-quality
//! criterion by moving in the plane and in altitude.

pub mod control;
pub mod geom;
pub mod io;
pub mod par;
pub mod partition;
pub mod quality;
pub mod scenario;
pub mod sim;
pub mod svg;

pub use control::{control_input, optimal_altitude, stable_altitude, ControlInput, Gains};
pub use partition::{compute_all_cells, compute_cell, neighbor_set, Cell, CellSet, NodeState, SwarmState};
pub use quality::{QualityModel, QualityVariant};
pub use sim::{run, step, SimConfig, TrajectoryLog};
