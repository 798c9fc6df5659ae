//! Radial `d = 3` evolution with monitors, detectors and the checks of the
//! ejection and modulation dynamics.

pub mod config;
pub mod diagnostics;
pub mod evolve;
pub mod record;
pub mod scheme;

pub use config::EvolutionConfig;
pub use diagnostics::{
    fit_ejection_rate, identity_residuals, linear_lambda, linear_prediction_check, modulation_ode_residual,
    one_pass_check, EjectionFit, EjectionWindow, IdentityResiduals, LinearCheck, OdeResidual, OnePassReport,
};
pub use evolve::{detect_blowup, detect_scattering, evolve_with_monitors, Evolver};
pub use record::{BlowupEvidence, DirectionRecord, MonitorExtra, MonitorRow, TrajectoryRecord, Verdict};
pub use scheme::{integrator_registry, step, Integrator, Verlet, WaveGrid, WaveState, Yoshida4};
