//! The static ground state `W` and its scaling, translation and boost
//! family.

use std::f64::consts::PI;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::box3d::Box3DGrid;
use super::domain::Domain;
use super::radial::RadialGrid;
use super::state::Pair;
use crate::error::{Error, Result};

/// Nonlinearity exponent `p = (d+2)/(d-2)`.
pub fn exponent_p(d: usize) -> f64 {
    (d as f64 + 2.0) / (d as f64 - 2.0)
}

/// Critical Sobolev exponent `2* = 2d/(d-2)`.
pub fn crit_exponent(d: usize) -> f64 {
    2.0 * d as f64 / (d as f64 - 2.0)
}

/// `W(r) = (1 + r^2/(d(d-2)))^{1-d/2}`.
pub fn w_value(d: usize, r: f64) -> f64 {
    let df = d as f64;
    let base = 1.0 + r * r / (df * (df - 2.0));
    match d {
        3 => 1.0 / base.sqrt(),
        5 => 1.0 / (base * base.sqrt()),
        _ => base.powf(1.0 - df / 2.0),
    }
}

/// `dW/dr = -(r/d) (1 + r^2/(d(d-2)))^{-d/2}`.
pub fn w_dr(d: usize, r: f64) -> f64 {
    let df = d as f64;
    let base = 1.0 + r * r / (df * (df - 2.0));
    let pw = match d {
        3 => 1.0 / (base * base.sqrt()),
        5 => 1.0 / (base * base * base.sqrt()),
        _ => base.powf(-df / 2.0),
    };
    -r / df * pw
}

/// `W' = (r d/dr + d/2 - 1) W`, the generator of the energy-preserving
/// scaling applied to `W`.
pub fn w_prime(d: usize, r: f64) -> f64 {
    r * w_dr(d, r) + (d as f64 / 2.0 - 1.0) * w_value(d, r)
}

/// `dW'/dr`, from the closed form `W' = (d/2-1) W_base^{-d/2} (1 - r^2/(d(d-2)))`.
pub fn w_prime_dr(d: usize, r: f64) -> f64 {
    let df = d as f64;
    let a = 1.0 / (df * (df - 2.0));
    let base = 1.0 + a * r * r;
    let c = df / 2.0 - 1.0;
    // W' = c (1 - a r^2) base^{-d/2}
    c * (-2.0 * a * r * base.powf(-df / 2.0)
        + (1.0 - a * r * r) * (-df / 2.0) * base.powf(-df / 2.0 - 1.0) * 2.0 * a * r)
}

/// `W` at a point of `R^d`.
pub fn eval_w(d: usize, x: &[f64]) -> f64 {
    w_value(d, x.iter().map(|v| v * v).sum::<f64>().sqrt())
}

/// `||grad W||_2^2`, closed form for `d = 3, 5`.
pub fn ground_gradient_sq(d: usize) -> f64 {
    match d {
        3 => 3.0 * 3f64.sqrt() * PI * PI / 4.0,
        5 => PI.powi(3) * 15f64.powf(2.5) / 32.0,
        _ => f64::NAN,
    }
}

/// `J(W) = ||grad W||^2 / d`.
pub fn ground_energy(d: usize) -> f64 {
    ground_gradient_sq(d) / d as f64
}

/// Scale, boost and centre of an element of the soliton family.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoostParams {
    pub sigma: f64,
    pub p: Vec<f64>,
    pub q: Vec<f64>,
}

impl BoostParams {
    pub fn scale(sigma: f64, d: usize) -> Self {
        Self {
            sigma,
            p: vec![0.0; d],
            q: vec![0.0; d],
        }
    }

    fn validate(&self, d: usize) -> Result<()> {
        if self.p.len() != d || self.q.len() != d {
            return Err(Error::Config(format!(
                "boost vectors must have length {d}, got p:{} q:{}",
                self.p.len(),
                self.q.len()
            )));
        }
        if !self.sigma.is_finite() || self.p.iter().chain(&self.q).any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("boost parameters"));
        }
        Ok(())
    }
}

/// Minimum resolvable length scale on a domain, relative to its spacing.
pub trait ResolutionFloor {
    fn resolution_floor(&self) -> f64;
}

impl ResolutionFloor for RadialGrid {
    fn resolution_floor(&self) -> f64 {
        4.0 * self.min_spacing()
    }
}

impl ResolutionFloor for Box3DGrid {
    /// The coarse boxes only need to carry `W` at unit scale.
    fn resolution_floor(&self) -> f64 {
        self.min_spacing()
    }
}

/// Fails if the scale `e^{-sigma}` is below the grid's resolution floor.
pub fn check_resolution<G: Domain + ResolutionFloor>(grid: &G, sigma: f64) -> Result<()> {
    let scale = (-sigma).exp();
    let spacing = grid.resolution_floor();
    if scale < spacing {
        return Err(Error::Resolution { scale, spacing });
    }
    Ok(())
}

/// Samples `(W_sigma(p,q), -grad W_sigma(p,q) . p / <p>)`.
///
/// The boost acts through `y = z + p (p . z) / (<p> + 1)` with `z = x - q`,
/// which is the closed-form argument with its `p -> 0` limit built in.
pub fn sample_w_family<G: Domain + ResolutionFloor>(
    grid: &Arc<G>,
    params: &BoostParams,
) -> Result<Pair<G>> {
    let d = grid.dim();
    params.validate(d)?;
    check_resolution(&**grid, params.sigma)?;
    let n = grid.len();
    let es = params.sigma.exp();
    let amp1 = (es).powf(d as f64 / 2.0 - 1.0);
    let amp_grad = es.powf(d as f64 / 2.0);

    if grid.translation_dims() == 0 {
        if params.p.iter().chain(&params.q).any(|v| *v != 0.0) {
            return Err(Error::Config(
                "radial grids carry only centred, unboosted solitons".into(),
            ));
        }
        let r = grid.radii(&[]);
        let u1 = r.iter().map(|&r| amp1 * w_value(d, es * r)).collect();
        return Pair::new(grid.clone(), u1, vec![0.0; n]);
    }

    let pp: f64 = params.p.iter().map(|v| v * v).sum();
    let lp = (1.0 + pp).sqrt();
    let coef = 1.0 / (lp + 1.0);
    let z: Vec<Vec<f64>> = (0..d).map(|j| grid.offsets(&params.q, j)).collect();
    let mut u1 = Vec::with_capacity(n);
    let mut u2 = Vec::with_capacity(n);
    let mut y = vec![0.0; d];
    for i in 0..n {
        let pz: f64 = (0..d).map(|j| params.p[j] * z[j][i]).sum();
        for j in 0..d {
            y[j] = z[j][i] + params.p[j] * pz * coef;
        }
        let ry = y.iter().map(|v| v * v).sum::<f64>().sqrt();
        u1.push(amp1 * w_value(d, es * ry));
        // grad W_sigma(y) . p; grad_x of the composition carries a factor <p>
        // that cancels the 1/<p>.
        let py: f64 = (0..d).map(|j| params.p[j] * y[j]).sum();
        let radial = if ry > 0.0 {
            amp_grad * w_dr(d, es * ry) / ry
        } else {
            0.0
        };
        u2.push(-radial * py);
    }
    Pair::new(grid.clone(), u1, u2)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn closed_form_values() {
        assert_eq!(eval_w(3, &[0.0, 0.0, 0.0]), 1.0);
        assert_eq!(eval_w(5, &[0.0; 5]), 1.0);
        let x = [1.0, 1.0, 1.0];
        assert!((eval_w(3, &x) - 0.5f64.sqrt()).abs() < 1e-15);
        assert!((w_value(5, 15f64.sqrt()) - 2f64.powf(-1.5)).abs() < 1e-15);
    }

    #[test]
    fn derivatives_match_finite_differences() {
        for d in [3usize, 5] {
            for &r in &[0.1, 1.0, 3.7, 20.0] {
                let h = 1e-5;
                let fd = (w_value(d, r + h) - w_value(d, r - h)) / (2.0 * h);
                assert!((w_dr(d, r) - fd).abs() < 1e-9);
                let fd2 = (w_prime(d, r + h) - w_prime(d, r - h)) / (2.0 * h);
                assert!((w_prime_dr(d, r) - fd2).abs() < 1e-9, "d={d} r={r}");
            }
        }
    }

    #[test]
    fn w_is_decreasing_and_positive() {
        for d in [3usize, 5] {
            let mut prev = f64::INFINITY;
            for i in 0..200 {
                let v = w_value(d, i as f64 * 0.37);
                assert!(v > 0.0 && v < prev);
                prev = v;
            }
        }
    }

    #[test]
    fn w_prime_changes_sign_once() {
        // W' vanishes at r^2 = d(d-2)
        assert!(w_prime(3, 3f64.sqrt()).abs() < 1e-15);
        assert!(w_prime(3, 1.0) > 0.0 && w_prime(3, 2.0) < 0.0);
    }
}
