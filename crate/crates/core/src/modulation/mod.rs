//! Decomposition of states near the soliton family: frame fit, mode split,
//! distance, sign functional and region predicates.

pub mod calibrate;
pub mod distance;
pub mod fit;
pub mod frame;
pub mod modes;
pub mod search;
pub mod settings;
pub mod sign;

pub use distance::{analyze, distance_dw, Analysis, DistanceReport, Regime};
pub use fit::{assemble, fit_modulation, project_orthogonal, solve_frame, ModulationFit};
pub use frame::FrameParams;
pub use modes::{excess_energy, linearized_norm_sq, split_modes, superquadratic_c, ModeSplit};
pub use search::{direct_distance, search_distance, DistanceSearch};
pub use settings::{ModulationSettings, Thresholds};
pub use sign::{region_predicates, sign_functional, sign_of, RegionFlags};
pub use calibrate::{calibrate, Calibration};

#[cfg(test)]
mod tests;
