//! Exact simulator and corridor calculator for the periodic Lorentz gas.
//!
//! * [`lattice`]: scatterer configurations, corridor enumeration and the
//!   corridor-sum tail constants.
//! * [`dynamics`]: exact free flights and specular collisions.
//! * [`sampling`]: reproducible draws from the flow and collision measures.
//! * [`stats`]: survival curves, tail fits, displacement covariance, reports.
//! * [`experiment`]: deterministic parallel drivers behind the CLI.

#![allow(clippy::needless_range_loop)]

pub mod cli;
pub mod dynamics;
pub mod experiment;
pub mod lattice;
pub mod real;
pub mod sampling;
pub mod stats;

pub use dynamics::{collision_step, free_flight, reflect, trajectory, FlightResult, Lattice, ParticleState};
pub use lattice::{
    classify_horizon, enumerate_corridors, santalo_mean_free_path, tail_constants, validate_lattice, Corridor,
    CorridorSpectrum, Horizon, LatticeError, LatticeSpec, TailConstants,
};
