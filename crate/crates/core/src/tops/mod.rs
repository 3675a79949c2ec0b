//! Symmetric thermal optimal path estimation on the rotated `(t, x)` lattice.

mod calendar;
mod distance;
mod dp;
mod ensemble;
mod lattice;
mod thermal;

pub use calendar::{to_calendar_lags, LeadLagPath};
pub use distance::{distance_matrix, local_minimal_mapping, DistanceMatrix};
pub use dp::dp_optimal_path;
pub use ensemble::{
    run_ensemble, thermal_average_path, tops_ensemble, EnsembleConfig, EnsembleOutcome,
    MemberSummary, ThermalPath,
};
pub use lattice::{LatticeNode, Region};
pub use thermal::{free_energy, thermal_weights, BoltzmannLattice, Direction, ThermalField};
