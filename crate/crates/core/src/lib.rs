//! Low-temperature 3D Ising interfaces under Dobrushin boundary conditions.
//!
//! The crate covers lattice geometry, configurations and their interfaces,
//! the walls-and-ceilings decomposition with its standard-wall bijection,
//! constrained Metropolis sampling with a hard floor, exact enumeration on
//! tiny boxes, interface observables, estimation of the large-deviation
//! rates that set the repulsion height, and a reproducible experiment layer.

pub mod alpha;
pub mod error;
pub mod experiment;
pub mod geometry;
pub mod interface;
pub mod observables;
pub mod oracle;
pub mod sampler;
pub mod spin;
pub mod walls;

pub use error::{Error, Result};
pub use geometry::{
    cells_of_box, column_and_height, project, star_adjacent, Axis, BoxDims, CellId, EdgeDir, FaceGrid,
    FaceId, ProjElement,
};
pub use interface::{extract_interface, satisfies_floor, spin_from_interface, Interface};
pub use spin::{delta_energy, dobrushin_spin, hamiltonian, separating_faces, ModelParams, SpinConfig};
pub use walls::{
    decompose, excess_energy, excess_rel, isodim_at_most, reconstruct, shift_up, standard_rep, standardize,
    Ceiling, StandardWallCollection, Wall, WallCluster, WallDecomposition,
};
pub use alpha::{
    build_alpha_table, compute_h_star, estimate_alpha, fit_alpha_rate, plus_connection_event, AlphaEntry, AlphaMethod,
    AlphaRun, AlphaTable, HStarResult, RateFit,
};
pub use observables::{height_histogram, nonzero_sites, repelled_sites, ColumnClass, ColumnTraces, HeightHistogram};
pub use oracle::{enumerate_configs, enumerate_standard_wall_collections, ExactDistribution, InterfaceDistribution};
pub use sampler::{Chain, ChainSchedule, FloorConstraint, UpdateRule};
