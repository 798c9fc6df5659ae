//! Empirical calibration of the capture radius `delta_A` and of the constant
//! `C` in `d0`, on radial probe families around `W`.

use serde::{Deserialize, Serialize};

use super::fit::fit_from_search;
use super::modes::{excess_energy, split_modes};
use super::search::search_distance;
use super::settings::{ModulationSettings, Thresholds};
use crate::error::{Error, Result};
use crate::field::domain::{grad_sq, Domain};
use crate::field::ground::w_value;
use crate::field::state::RadialState;
use crate::spectral::SpectralData;

/// Raw distance, `d1` and fit status of one probe.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ProbePoint {
    pub family: String,
    pub eps: f64,
    pub dist: f64,
    pub d1: Option<f64>,
    pub reliable: bool,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Calibration {
    /// Largest raw distance up to which every family fitted reliably.
    pub capture_raw: f64,
    pub thresholds: Thresholds,
    pub points: Vec<ProbePoint>,
}

/// Fraction of the measured capture radius used as `delta_A`.
const SAFETY: f64 = 0.5;
/// `d1 / (C dist)` must stay within `[1/BAND, BAND]` for a fit to count.
const BAND: f64 = 2.0;

fn family(spec: &SpectralData, name: &str, eps: f64) -> Result<RadialState> {
    let g = spec.grid.clone();
    let rho = spec.rho.values();
    let w: Vec<f64> = g.sample(|r| w_value(spec.d, r));
    let bump: Vec<f64> = g.sample(|r| (-(r - 3.0) * (r - 3.0)).exp());
    let bump_norm = grad_sq(&*g, &bump).sqrt();
    let n = g.len();
    let (u1, u2): (Vec<f64>, Vec<f64>) = match name {
        "rho+" => ((0..n).map(|i| w[i] + eps * rho[i]).collect(), vec![0.0; n]),
        "rho-" => ((0..n).map(|i| w[i] - eps * rho[i]).collect(), vec![0.0; n]),
        "dilate+" => (w.iter().map(|v| (1.0 + eps) * v).collect(), vec![0.0; n]),
        "dilate-" => (w.iter().map(|v| (1.0 - eps) * v).collect(), vec![0.0; n]),
        "bump" => ((0..n).map(|i| w[i] + eps * bump[i] / bump_norm).collect(), vec![0.0; n]),
        "velocity" => (w.clone(), rho.iter().map(|v| eps * v).collect()),
        _ => return Err(Error::Config(format!("unknown probe family {name}"))),
    };
    RadialState::new(g, u1, u2)
}

pub const FAMILIES: [&str; 6] = ["rho+", "rho-", "dilate+", "dilate-", "bump", "velocity"];

fn probe(spec: &SpectralData, settings: &ModulationSettings, name: &str, eps: f64) -> Result<(f64, Option<f64>)> {
    let s = family(spec, name, eps)?;
    let search = search_distance(spec, &s, settings, None)?;
    let dist = search.best().dist;
    let d1 = fit_from_search(spec, &s, settings, &search)
        .and_then(|f| {
            let m = split_modes(spec, &f)?;
            let ex = excess_energy(spec, &f)?;
            Ok(ex + spec.k * spec.k * m.lambda1 * m.lambda1)
        })
        .ok()
        .filter(|r| *r > 0.0 && r.is_finite())
        .map(f64::sqrt);
    Ok((dist, d1))
}

/// Scans each family over geometric `eps` and derives the thresholds.
pub fn calibrate(spec: &SpectralData, settings: &ModulationSettings) -> Result<Calibration> {
    // Small-amplitude ratio d1 / dist on the rho family fixes the scale of
    // the comparability band.
    let (dist0, d10) = probe(spec, settings, "rho+", 1e-4)?;
    let c_lin = d10.ok_or_else(|| Error::Consistency("no fit at eps = 1e-4".into()))? / dist0;

    let eps_grid: Vec<f64> = (0..24).map(|i| 1e-3 * 1.4f64.powi(i)).collect();
    let mut points = Vec::new();
    let mut capture = f64::INFINITY;
    for name in FAMILIES {
        let mut last_good = 0.0;
        for &eps in &eps_grid {
            let (dist, d1) = probe(spec, settings, name, eps)?;
            let reliable = d1.is_some_and(|d| {
                let ratio = d / (c_lin * dist);
                (1.0 / BAND..=BAND).contains(&ratio)
            });
            points.push(ProbePoint {
                family: name.to_string(),
                eps,
                dist,
                d1,
                reliable,
            });
            if !reliable {
                break;
            }
            last_good = dist;
        }
        capture = capture.min(last_good);
    }
    if capture <= 0.0 {
        return Err(Error::Consistency("no family fitted at the smallest amplitude".into()));
    }
    let delta_raw = SAFETY * capture;

    // C such that d0 = d1 where d1 = delta_E / 2, i.e. where dist = delta_raw / 8.
    let target = delta_raw / 8.0;
    let (mut lo, mut hi) = (1e-6_f64, 1.0_f64);
    for _ in 0..60 {
        let mid = (lo * hi).sqrt();
        if probe(spec, settings, "rho+", mid)?.0 < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let (dist, d1) = probe(spec, settings, "rho+", (lo * hi).sqrt())?;
    let c_d0 = d1.ok_or_else(|| Error::Consistency("calibration probe did not fit".into()))? / dist;
    Ok(Calibration {
        capture_raw: capture,
        thresholds: Thresholds {
            delta_a: c_d0 * delta_raw,
            c_d0,
        },
        points,
    })
}
