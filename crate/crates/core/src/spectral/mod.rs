//! Linearized operator `L+`, its ground state, and the derived constants
//! and modes.

pub mod banded;
pub mod coercivity;
pub mod data;
pub mod operator;
pub mod profile;
pub mod solver;

pub use data::{ConstantsFile, SpectralData};
pub use operator::LinearizedOperator;
pub use profile::RadialProfile;
pub use solver::{solver_registry, GroundStateSolution, GroundStateSolver, SolverSettings};
