//! The blended distance `d_W` to the soliton family and the full analysis of
//! a state (energy, virial, fit, modes) it is built from.

use serde::{Deserialize, Serialize};

use super::fit::{fit_from_search, ModulationFit};
use super::frame::FrameParams;
use super::modes::{excess_energy, split_modes, ModeSplit};
use super::search::search_distance;
use super::settings::{ModulationSettings, Thresholds};
use crate::error::Result;
use crate::field::domain::Domain;
use crate::field::functionals::{energy, functional_j, functional_k, smooth_step};
use crate::field::ground::{ground_energy, ResolutionFloor};
use crate::field::state::Pair;
use crate::spectral::SpectralData;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    /// `d0 <= delta_A / 2`: `d_W = d1`.
    Inner,
    Blend,
    /// `d0 >= delta_A`: `d_W = d0`.
    Outer,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DistanceReport {
    pub d0: f64,
    pub d1: Option<f64>,
    pub dw: f64,
    pub regime: Regime,
    /// Sign of the nearest soliton.
    pub sign: f64,
    pub sigma: f64,
    /// Set when `d1` was needed but the fit failed, so `d_W` fell back to `d0`.
    pub fallback: bool,
}

/// Everything derived from one state near or away from the soliton family.
#[derive(Clone, Debug)]
pub struct Analysis<G: Domain> {
    pub energy: f64,
    /// `E(u) - J(W)`, from the fit residual when a fit exists.
    pub excess: f64,
    pub k_value: f64,
    pub j_value: f64,
    /// `J(W)` in closed form.
    pub ground_energy: f64,
    pub report: DistanceReport,
    pub fit: Option<ModulationFit<G>>,
    pub split: Option<ModeSplit<G>>,
    pub fit_error: Option<String>,
}

impl<G: Domain> Analysis<G> {
    pub fn lambda1(&self) -> Option<f64> {
        self.split.as_ref().map(|s| s.lambda1)
    }

    pub fn frame(&self) -> Option<&FrameParams> {
        self.fit.as_ref().map(|f| &f.params)
    }
}

/// `chi(2 d0 / delta_A)`: 1 in the inner region, 0 in the outer one.
fn blend_weight(d0: f64, delta_a: f64) -> f64 {
    smooth_step(2.0 * d0 / delta_a, 1.0, 2.0)
}

/// Analyses `state`; the modulation fit is attempted when `d1` is needed or
/// when `force_fit` is set.
pub fn analyze<G: Domain + ResolutionFloor>(
    spec: &SpectralData,
    state: &Pair<G>,
    settings: &ModulationSettings,
    thresholds: &Thresholds,
    seed: Option<&FrameParams>,
    force_fit: bool,
) -> Result<Analysis<G>> {
    let grid = &*state.grid;
    let search = search_distance(spec, state, settings, seed)?;
    let best = search.best();
    let d0 = thresholds.c_d0 * best.dist;
    let chi = blend_weight(d0, thresholds.delta_a);

    let mut fit = None;
    let mut split = None;
    let mut fit_error = None;
    let mut d1 = None;
    let mut excess = None;
    if chi > 0.0 || force_fit {
        match fit_from_search(spec, state, settings, &search)
            .and_then(|f| split_modes(spec, &f).map(|s| (f, s)))
        {
            Ok((f, s)) => {
                let ex = excess_energy(spec, &f)?;
                let rad = ex + spec.k * spec.k * s.lambda1 * s.lambda1;
                d1 = Some(rad.max(0.0).sqrt());
                excess = Some(ex);
                fit = Some(f);
                split = Some(s);
            }
            Err(e) => fit_error = Some(e.to_string()),
        }
    }

    let (dw, fallback) = match d1 {
        Some(d1) => (chi * d1 + (1.0 - chi) * d0, false),
        None => (d0, chi > 0.0),
    };
    let regime = if chi >= 1.0 {
        Regime::Inner
    } else if chi <= 0.0 {
        Regime::Outer
    } else {
        Regime::Blend
    };
    let e = energy(state);
    let j_w = ground_energy(grid.dim());
    let (sign, sigma) = match &fit {
        Some(f) => (f.params.sign, f.params.sigma),
        None => (best.params.sign, best.params.sigma),
    };
    Ok(Analysis {
        energy: e,
        excess: excess.unwrap_or(e - j_w),
        k_value: functional_k(grid, &state.u1),
        j_value: functional_j(grid, &state.u1),
        ground_energy: j_w,
        report: DistanceReport {
            d0,
            d1,
            dw,
            regime,
            sign,
            sigma,
            fallback,
        },
        fit,
        split,
        fit_error,
    })
}

/// `d_W` with its components.
pub fn distance_dw<G: Domain + ResolutionFloor>(
    spec: &SpectralData,
    state: &Pair<G>,
    settings: &ModulationSettings,
    thresholds: &Thresholds,
) -> Result<DistanceReport> {
    Ok(analyze(spec, state, settings, thresholds, None, false)?.report)
}
