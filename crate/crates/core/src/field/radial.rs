use std::f64::consts::PI;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::axis::{Extent, MappedAxis, Spacing};
use super::domain::{abs_pow, Domain, Field};
use crate::error::{Error, Result};

/// Area of the unit sphere `S^{d-1}`.
pub fn sphere_area(d: usize) -> f64 {
    match d {
        1 => 2.0,
        2 => 2.0 * PI,
        3 => 4.0 * PI,
        4 => 2.0 * PI * PI,
        5 => 8.0 * PI * PI / 3.0,
        _ => sphere_area(d - 2) * 2.0 * PI / (d as f64 - 2.0),
    }
}

/// Serializable description of a radial grid.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RadialGridSpec {
    pub d: usize,
    pub r_max: f64,
    pub n: usize,
    pub spacing: Spacing,
}

impl RadialGridSpec {
    /// 4096 points on `(0, 200]`, fine near the origin.
    pub fn default_for(d: usize) -> Self {
        Self {
            d,
            r_max: 200.0,
            n: 4096,
            spacing: Spacing::Stretched { core: 2.0 },
        }
    }

    pub fn uniform(d: usize, r_max: f64, n: usize) -> Self {
        Self {
            d,
            r_max,
            n,
            spacing: Spacing::Uniform,
        }
    }

    pub fn build(self) -> Result<Arc<RadialGrid>> {
        RadialGrid::new(self).map(Arc::new)
    }
}

/// Cell-centred radial grid on `(0, r_max]` with the measure
/// `|S^{d-1}| r^{d-1} dr` folded into the weights.
#[derive(Clone, Debug)]
pub struct RadialGrid {
    spec: RadialGridSpec,
    axis: MappedAxis,
    weights: Vec<f64>,
    area: f64,
}

impl RadialGrid {
    pub fn new(spec: RadialGridSpec) -> Result<Self> {
        if spec.d != 3 && spec.d != 5 {
            return Err(Error::InvalidGrid(format!("dimension {} not in {{3, 5}}", spec.d)));
        }
        if spec.n < 16 {
            return Err(Error::InvalidGrid(format!("n = {} < 16", spec.n)));
        }
        if !(spec.r_max > 0.0 && spec.r_max.is_finite()) {
            return Err(Error::InvalidGrid(format!("r_max = {}", spec.r_max)));
        }
        if let Spacing::Stretched { core } = spec.spacing {
            if !(core > 0.0 && core.is_finite()) {
                return Err(Error::InvalidGrid(format!("stretch core = {core}")));
            }
        }
        let axis = MappedAxis::new(spec.spacing, Extent::HalfLine, spec.r_max, spec.n);
        let area = sphere_area(spec.d);
        let weights = axis
            .dx_weights()
            .iter()
            .zip(axis.nodes())
            .map(|(q, r)| area * q * r.powi(spec.d as i32 - 1))
            .collect();
        Ok(Self {
            spec,
            axis,
            weights,
            area,
        })
    }

    pub fn spec(&self) -> RadialGridSpec {
        self.spec
    }

    pub fn d(&self) -> usize {
        self.spec.d
    }

    pub fn r_max(&self) -> f64 {
        self.spec.r_max
    }

    pub fn nodes(&self) -> &[f64] {
        self.axis.nodes()
    }

    pub fn axis(&self) -> &MappedAxis {
        &self.axis
    }

    /// `df/dr` for an even function sampled on the grid.
    pub fn derivative(&self, f: &[f64]) -> Vec<f64> {
        self.axis.derivative(f)
    }

    /// `(f', f'')` for an even function.
    pub fn derivatives2(&self, f: &[f64]) -> (Vec<f64>, Vec<f64>) {
        self.axis.derivatives2(f)
    }

    /// Radial Laplacian `f'' + (d-1) f' / r`.
    pub fn laplacian(&self, f: &[f64]) -> Vec<f64> {
        let (f1, f2) = self.derivatives2(f);
        let c = self.spec.d as f64 - 1.0;
        self.nodes()
            .iter()
            .enumerate()
            .map(|(i, r)| f2[i] + c * f1[i] / r)
            .collect()
    }

    /// Value at `r`; beyond `r_max` the field is continued harmonically as
    /// `f(R) (R/r)^{d-2}` when `harmonic` is set, otherwise by zero.
    pub fn interpolate(&self, f: &[f64], r: f64, harmonic: bool) -> f64 {
        match self.axis.interpolate(f, r.abs()) {
            Some(v) => v,
            None if harmonic => {
                let big_r = self.spec.r_max;
                self.axis.value_at_outer(f) * (big_r / r.abs()).powi(self.spec.d as i32 - 2)
            }
            None => 0.0,
        }
    }

    /// Value of `f` at the outer edge `r_max`.
    pub fn edge_value(&self, f: &[f64]) -> f64 {
        self.axis.value_at_outer(f)
    }

    pub fn sample(&self, f: impl Fn(f64) -> f64) -> Vec<f64> {
        self.nodes().iter().map(|&r| f(r)).collect()
    }

    /// Index of the first node with `r >= r0`.
    pub fn first_index_beyond(&self, r0: f64) -> usize {
        self.nodes().partition_point(|&r| r < r0)
    }
}

impl Domain for RadialGrid {
    fn dim(&self) -> usize {
        self.spec.d
    }

    fn len(&self) -> usize {
        self.spec.n
    }

    fn translation_dims(&self) -> usize {
        0
    }

    fn weights(&self) -> &[f64] {
        &self.weights
    }

    fn gradient(&self, f: &[f64]) -> Vec<Vec<f64>> {
        vec![self.derivative(f)]
    }

    /// Harmonic continuation `f(R)(R/r)^{d-2}` outside `R = r_max`.
    fn exterior_grad(&self, f: &[f64], g: &[f64]) -> f64 {
        let d = self.spec.d as f64;
        let big_r = self.spec.r_max;
        self.area * (d - 2.0) * self.edge_value(f) * self.edge_value(g) * big_r.powf(d - 2.0)
    }

    fn exterior_power(&self, f: &[f64], q: f64) -> f64 {
        let d = self.spec.d as f64;
        let decay = q * (d - 2.0) - d;
        if decay <= 0.0 {
            return 0.0;
        }
        let big_r = self.spec.r_max;
        self.area * abs_pow(self.edge_value(f), q) * big_r.powf(d) / decay
    }

    fn min_spacing(&self) -> f64 {
        self.axis.min_spacing()
    }

    fn radius_at(&self, _c: &[f64], i: usize) -> f64 {
        self.nodes()[i]
    }

    fn radii(&self, _c: &[f64]) -> Vec<f64> {
        self.nodes().to_vec()
    }

    fn offsets(&self, _c: &[f64], _j: usize) -> Vec<f64> {
        Vec::new()
    }

    fn covers(&self, _c: &[f64], radius: f64) -> bool {
        radius <= self.spec.r_max
    }
}

pub type RadialField = Field<RadialGrid>;
