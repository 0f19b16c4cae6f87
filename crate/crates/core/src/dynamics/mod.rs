//! The generator `L`, its dual `L'`, time evolution, and stationary states.

mod evolve;
mod generator;
mod state;
mod stationary;

pub use evolve::{
    evolve, evolve_at, evolve_matrix, time_grid, Backend, EvolutionResult, EvolutionStats, EvolveOptions,
};
pub use generator::{apply_dual, apply_generator, heisenberg_derivative, Liouvillian};
pub use state::{DensityMatrix, InitialState};
pub use stationary::{stationary_state, stationary_state_of, StationaryState};
