//! Experiment configuration, initial-data recipes, the four-quadrant sweep
//! and the static check suite.

pub mod config;
pub mod quadrant;
pub mod recipes;
pub mod run;
pub mod static_suite;

pub use config::{ExperimentSpec, RecipeSpec, SweepSpec};
pub use quadrant::{expected_verdicts, run_quadrant_sweep, QuadrantRow, QuadrantTable};
pub use recipes::{recipe_registry, Bump, FileData, InitialData, Quadrant, ScaledW, QUADRANT_DIRECTIONS};
pub use run::{run_experiment, run_state, summarize, ExperimentOutcome, InitialSummary, Lab};
pub use static_suite::{
    boost_defect, round_trip_box, round_trip_errors, run_static_suite, Check, StaticOptions, StaticReport,
};
