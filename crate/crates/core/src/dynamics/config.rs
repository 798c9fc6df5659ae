use serde::{Deserialize, Serialize};

use super::scheme::WaveGrid;
use crate::error::{Error, Result};

/// Grid, step and detector settings of one evolution.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EvolutionConfig {
    pub r_max: f64,
    pub n: usize,
    /// Nominal step as a fraction of the grid spacing.
    pub cfl: f64,
    pub t_max: f64,
    pub integrator: String,
    /// Monitors are taken every `monitor_stride` nominal steps.
    pub monitor_stride: usize,
    pub absorbing: bool,
    /// `||u||_H` above which blow-up is suspected.
    pub blowup_norm_threshold: f64,
    /// `max |u|` above which blow-up is suspected.
    pub blowup_sup_threshold: f64,
    /// Re-run the tail at doubled resolution before declaring blow-up.
    pub confirm_blowup: bool,
    /// Length of the trailing window examined by the scattering detector.
    pub scatter_window: f64,
    /// `||u||_{2*}^{2*} / ||u||_H^2` must fall below this at the window end.
    pub scatter_ratio: f64,
    /// Scattering requires `||u||_H` to stay below this multiple of its
    /// initial value.
    pub scatter_norm_factor: f64,
    /// `S` in the light-cone radius `t + S` of the exterior energy and of
    /// the virial cutoff.
    pub cone_offset: f64,
    /// Stop as soon as a verdict is reached.
    pub stop_on_verdict: bool,
}

impl Default for EvolutionConfig {
    fn default() -> Self {
        Self {
            r_max: 200.0,
            n: 20_000,
            cfl: 0.5,
            t_max: 60.0,
            integrator: "yoshida4".into(),
            monitor_stride: 20,
            absorbing: true,
            blowup_norm_threshold: 30.0,
            blowup_sup_threshold: 10.0,
            confirm_blowup: true,
            scatter_window: 10.0,
            scatter_ratio: 1e-3,
            scatter_norm_factor: 2.0,
            cone_offset: 20.0,
            stop_on_verdict: true,
        }
    }
}

impl EvolutionConfig {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("r_max", self.r_max),
            ("t_max", self.t_max),
            ("blowup_norm_threshold", self.blowup_norm_threshold),
            ("blowup_sup_threshold", self.blowup_sup_threshold),
            ("scatter_window", self.scatter_window),
            ("scatter_ratio", self.scatter_ratio),
            ("cone_offset", self.cone_offset),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::Config(format!("{name} must be positive, got {v}")));
            }
        }
        if !(self.cfl > 0.0 && self.cfl <= 0.5) {
            return Err(Error::Config(format!("cfl must lie in (0, 0.5], got {}", self.cfl)));
        }
        if self.scatter_norm_factor <= 1.0 {
            return Err(Error::Config("scatter_norm_factor must exceed 1".into()));
        }
        if self.monitor_stride == 0 {
            return Err(Error::Config("monitor_stride must be at least 1".into()));
        }
        Ok(())
    }

    pub fn grid(&self) -> Result<WaveGrid> {
        WaveGrid::new(self.r_max, self.n, self.absorbing)
    }

    pub fn spacing(&self) -> f64 {
        self.r_max / self.n as f64
    }

    /// Nominal time step.
    pub fn dt(&self) -> f64 {
        self.cfl * self.spacing()
    }

    pub fn monitor_interval(&self) -> f64 {
        self.monitor_stride as f64 * self.dt()
    }
}
