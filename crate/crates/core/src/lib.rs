//! Numerical laboratory for the focusing energy-critical wave equation
//! `u_tt - Laplace u = |u|^{p-1} u`: ground states, linearized spectral
//! data, modulation near the soliton family, radial evolution and the
//! blow-up / scattering classification of trajectories.

pub mod dynamics;
pub mod error;
pub mod experiment;
pub mod field;
pub mod modulation;
pub mod registry;
pub mod spectral;

pub use error::{Error, Result};
