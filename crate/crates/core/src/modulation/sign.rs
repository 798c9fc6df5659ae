//! The sign functional and the energy/distance region predicates.

use serde::{Deserialize, Serialize};

use super::distance::Analysis;
use super::settings::Thresholds;
use crate::error::{Error, Result};
use crate::field::domain::Domain;

/// `sign` with the convention `sign 0 = +1`.
pub fn sign_of(x: f64) -> i8 {
    if x < 0.0 {
        -1
    } else {
        1
    }
}

/// `-sign lambda_1` near the soliton family, `sign K(u1)` away from it; both
/// rules must agree where they overlap.
pub fn sign_functional<G: Domain>(a: &Analysis<G>, th: &Thresholds) -> Result<i8> {
    let dw = a.report.dw;
    let inner = match a.lambda1() {
        Some(l1) if dw <= th.delta_e() => Some(-sign_of(l1)),
        _ => None,
    };
    let outer = (dw >= th.delta_s()).then(|| sign_of(a.k_value));
    match (inner, outer) {
        (Some(i), Some(o)) if i != o => Err(Error::SignConflict {
            lambda1: a.lambda1().unwrap_or(f64::NAN),
            k_value: a.k_value,
        }),
        (Some(i), _) => Ok(i),
        (None, Some(o)) => Ok(o),
        (None, None) => Err(Error::UndefinedRegion(format!(
            "d_W = {dw:.3e} below {:.3e} without a modulation fit",
            th.delta_s()
        ))),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RegionFlags {
    /// `E <= J(W) + eps_*^2`.
    pub in_h_star: bool,
    /// Additionally `E < J(W) + d_W^2 / 2`.
    pub in_h_x: bool,
    /// `J(u1) < J(W) + eps_*^2` and `d_W > delta_S`.
    pub in_variational_zone: bool,
}

pub fn region_predicates<G: Domain>(a: &Analysis<G>, th: &Thresholds) -> RegionFlags {
    let eps2 = th.eps_star().powi(2);
    let dw = a.report.dw;
    let in_h_star = a.excess <= eps2;
    RegionFlags {
        in_h_star,
        in_h_x: in_h_star && a.excess < 0.5 * dw * dw,
        in_variational_zone: a.j_value - a.ground_energy < eps2 && dw > th.delta_s(),
    }
}
