use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};

/// A discretized spatial domain: quadrature, gradients and coordinates.
///
/// All integrals are `sum_i weights[i] * f(x_i)` plus, where a domain
/// truncates a power-law tail, an analytic exterior correction.
pub trait Domain: fmt::Debug + Send + Sync {
    /// Spatial dimension `d` of the underlying problem.
    fn dim(&self) -> usize;

    fn len(&self) -> usize;

    /// Number of free translation directions (0 for radial domains).
    fn translation_dims(&self) -> usize;

    /// Quadrature weights for `int f dx` over the whole of `R^d`.
    fn weights(&self) -> &[f64];

    /// Gradient components; one component for radial domains (`d/dr`).
    fn gradient(&self, f: &[f64]) -> Vec<Vec<f64>>;

    /// Exterior contribution to `<grad f | grad g>` beyond the truncation.
    fn exterior_grad(&self, _f: &[f64], _g: &[f64]) -> f64 {
        0.0
    }

    /// Exterior contribution to `int |f|^q` beyond the truncation.
    fn exterior_power(&self, _f: &[f64], _q: f64) -> f64 {
        0.0
    }

    /// Smallest node spacing.
    fn min_spacing(&self) -> f64;

    /// `|x_i - c|` at node `i`.
    fn radius_at(&self, c: &[f64], i: usize) -> f64;

    /// `|x_i - c|` at every node.
    fn radii(&self, c: &[f64]) -> Vec<f64> {
        (0..self.len()).map(|i| self.radius_at(c, i)).collect()
    }

    /// `x_i[j] - c[j]` at every node. Radial domains have no components.
    fn offsets(&self, c: &[f64], j: usize) -> Vec<f64>;

    /// Whether the region `|x - c| <= radius` is covered by the grid.
    fn covers(&self, c: &[f64], radius: f64) -> bool;
}

/// Samples of a scalar function on a domain.
#[derive(Clone, Debug)]
pub struct Field<G: Domain> {
    grid: Arc<G>,
    values: Vec<f64>,
}

impl<G: Domain> Field<G> {
    pub fn new(grid: Arc<G>, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::GridMismatch);
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("field values"));
        }
        Ok(Self { grid, values })
    }

    pub fn zeros(grid: Arc<G>) -> Self {
        let n = grid.len();
        Self {
            grid,
            values: vec![0.0; n],
        }
    }

    pub fn grid(&self) -> &Arc<G> {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }
}

pub(crate) fn dot(w: &[f64], f: &[f64], g: &[f64]) -> f64 {
    w.iter().zip(f).zip(g).map(|((w, a), b)| w * a * b).sum()
}

/// `<f | g>` in `L^2`.
pub fn inner<G: Domain + ?Sized>(grid: &G, f: &[f64], g: &[f64]) -> f64 {
    dot(grid.weights(), f, g)
}

/// `<grad f | grad g>`.
pub fn grad_inner<G: Domain + ?Sized>(grid: &G, f: &[f64], g: &[f64]) -> f64 {
    let gf = grid.gradient(f);
    let gg = grid.gradient(g);
    let w = grid.weights();
    gf.iter().zip(&gg).map(|(a, b)| dot(w, a, b)).sum::<f64>() + grid.exterior_grad(f, g)
}

/// `||grad f||_2^2`.
pub fn grad_sq<G: Domain + ?Sized>(grid: &G, f: &[f64]) -> f64 {
    let w = grid.weights();
    grid.gradient(f).iter().map(|a| dot(w, a, a)).sum::<f64>() + grid.exterior_grad(f, f)
}

/// `int |f|^q`.
pub fn power_integral<G: Domain + ?Sized>(grid: &G, f: &[f64], q: f64) -> f64 {
    grid.weights()
        .iter()
        .zip(f)
        .map(|(w, v)| w * abs_pow(*v, q))
        .sum::<f64>()
        + grid.exterior_power(f, q)
}

/// `|v|^q`, using integer powers when `q` is integral.
#[inline]
pub fn abs_pow(v: f64, q: f64) -> f64 {
    if q == q.trunc() && q.abs() < 32.0 {
        v.abs().powi(q as i32)
    } else {
        v.abs().powf(q)
    }
}
