use serde::{Deserialize, Serialize};

/// Numerical controls of the modulation solve and the distance search.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ModulationSettings {
    /// Orthogonality tolerance relative to `||v||_H`.
    pub tol_orth: f64,
    pub max_iters: usize,
    /// Relative gap below which the two signs are considered ambiguous.
    pub sign_ratio: f64,
    pub sigma_min: f64,
    pub sigma_max: f64,
    /// Step of the coarse scan in `sigma`.
    pub sigma_step: f64,
    /// Golden-section iterations per one-dimensional search.
    pub golden_iters: usize,
    /// Alternating sweeps over the centre coordinates.
    pub centre_sweeps: usize,
}

impl Default for ModulationSettings {
    fn default() -> Self {
        Self {
            tol_orth: 1e-8,
            max_iters: 30,
            sign_ratio: 0.1,
            sigma_min: -4.0,
            sigma_max: 4.0,
            sigma_step: 0.25,
            golden_iters: 40,
            centre_sweeps: 2,
        }
    }
}

/// Distance thresholds, all derived from the capture radius `delta_A`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Thresholds {
    /// Capture radius of the modulation solve, in `d0` units.
    pub delta_a: f64,
    /// Calibration constant multiplying the raw distance in `d0`.
    pub c_d0: f64,
}

/// Output of `calibrate` on the default `d = 3` grid, frozen; a test
/// recalibrates and compares.
impl Default for Thresholds {
    fn default() -> Self {
        Self {
            delta_a: 0.2434138033295867,
            c_d0: 1.2977474535977949,
        }
    }
}

impl Thresholds {
    pub fn delta_e(&self) -> f64 {
        self.delta_a / 4.0
    }

    pub fn delta_h(&self) -> f64 {
        self.delta_e() / 4.0
    }

    pub fn delta_s(&self) -> f64 {
        self.delta_h() / 4.0
    }

    pub fn delta_star(&self) -> f64 {
        self.delta_s() / 4.0
    }

    pub fn eps_star(&self) -> f64 {
        self.delta_star() / 4.0
    }
}
