use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::axis::{Extent, MappedAxis, Spacing};
use super::domain::{Domain, Field};
use crate::error::{Error, Result};

/// Serializable description of a cubic 3-D grid `[-L, L]^3`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoxGridSpec {
    pub half_width: f64,
    pub m: usize,
    pub spacing: Spacing,
}

impl Default for BoxGridSpec {
    fn default() -> Self {
        Self {
            half_width: 20.0,
            m: 64,
            spacing: Spacing::Uniform,
        }
    }
}

impl BoxGridSpec {
    /// Stretched box reaching far into the power-law tail of `W`; used for
    /// boosted-soliton functionals where truncation matters.
    pub fn far_field() -> Self {
        Self {
            half_width: 1.0e5,
            m: 64,
            spacing: Spacing::Stretched { core: 1.0 },
        }
    }

    pub fn build(self) -> Result<Arc<Box3DGrid>> {
        Box3DGrid::new(self).map(Arc::new)
    }
}

/// Tensor-product grid in three dimensions, `m^3` cell-centred nodes.
#[derive(Clone, Debug)]
pub struct Box3DGrid {
    spec: BoxGridSpec,
    axis: MappedAxis,
    weights: Vec<f64>,
}

impl Box3DGrid {
    pub fn new(spec: BoxGridSpec) -> Result<Self> {
        if spec.m < 16 {
            return Err(Error::InvalidGrid(format!("m = {} < 16", spec.m)));
        }
        if !(spec.half_width > 0.0 && spec.half_width.is_finite()) {
            return Err(Error::InvalidGrid(format!("half width {}", spec.half_width)));
        }
        let axis = MappedAxis::new(spec.spacing, Extent::FullLine, spec.half_width, spec.m);
        let q = axis.dx_weights();
        let m = spec.m;
        let mut weights = Vec::with_capacity(m * m * m);
        for i in 0..m {
            for j in 0..m {
                for k in 0..m {
                    weights.push(q[i] * q[j] * q[k]);
                }
            }
        }
        Ok(Self {
            spec,
            axis,
            weights,
        })
    }

    pub fn spec(&self) -> BoxGridSpec {
        self.spec
    }

    pub fn m(&self) -> usize {
        self.spec.m
    }

    pub fn axis(&self) -> &MappedAxis {
        &self.axis
    }

    #[inline]
    pub fn index(&self, i: usize, j: usize, k: usize) -> usize {
        let m = self.spec.m;
        (i * m + j) * m + k
    }

    pub fn point(&self, idx: usize) -> [f64; 3] {
        let m = self.spec.m;
        let x = self.axis.nodes();
        [x[idx / (m * m)], x[(idx / m) % m], x[idx % m]]
    }

    pub fn sample(&self, f: impl Fn([f64; 3]) -> f64 + Sync) -> Vec<f64> {
        (0..self.len()).into_par_iter().map(|i| f(self.point(i))).collect()
    }

    /// Partial derivative along axis `dir` (0, 1, 2).
    pub fn partial(&self, f: &[f64], dir: usize) -> Vec<f64> {
        let m = self.spec.m;
        let stride = [m * m, m, 1][dir];
        let mut out = vec![0.0; f.len()];
        // one line per (outer, inner) pair orthogonal to `dir`
        let lines: Vec<usize> = (0..m * m)
            .map(|l| {
                let (a, b) = (l / m, l % m);
                match dir {
                    0 => a * m + b,
                    1 => a * m * m + b,
                    _ => (a * m + b) * m,
                }
            })
            .collect();
        let results: Vec<(usize, Vec<f64>)> = lines
            .par_iter()
            .map(|&start| {
                let line: Vec<f64> = (0..m).map(|t| f[start + t * stride]).collect();
                (start, self.axis.derivative(&line))
            })
            .collect();
        for (start, d) in results {
            for (t, v) in d.into_iter().enumerate() {
                out[start + t * stride] = v;
            }
        }
        out
    }
}

impl Domain for Box3DGrid {
    fn dim(&self) -> usize {
        3
    }

    fn len(&self) -> usize {
        self.weights.len()
    }

    fn translation_dims(&self) -> usize {
        3
    }

    fn weights(&self) -> &[f64] {
        &self.weights
    }

    fn gradient(&self, f: &[f64]) -> Vec<Vec<f64>> {
        (0..3).map(|d| self.partial(f, d)).collect()
    }

    fn min_spacing(&self) -> f64 {
        self.axis.min_spacing()
    }

    fn radius_at(&self, c: &[f64], i: usize) -> f64 {
        let p = self.point(i);
        let dx = p[0] - c[0];
        let dy = p[1] - c[1];
        let dz = p[2] - c[2];
        (dx * dx + dy * dy + dz * dz).sqrt()
    }

    fn radii(&self, c: &[f64]) -> Vec<f64> {
        (0..self.len())
            .into_par_iter()
            .map(|i| self.radius_at(c, i))
            .collect()
    }

    fn offsets(&self, c: &[f64], j: usize) -> Vec<f64> {
        (0..self.len()).map(|i| self.point(i)[j] - c[j]).collect()
    }

    fn covers(&self, c: &[f64], radius: f64) -> bool {
        c.iter().all(|x| x.abs() + radius <= self.spec.half_width)
    }
}

pub type Field3D = Field<Box3DGrid>;

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::domain::{grad_sq, inner};
    use std::f64::consts::PI;

    #[test]
    fn gaussian_integrals_on_box() {
        let g = BoxGridSpec::default().build().unwrap();
        let f = g.sample(|p| (-(p[0] * p[0] + p[1] * p[1] + p[2] * p[2]) / 4.0).exp());
        // int exp(-|x|^2/2) = (2 pi)^{3/2}
        let l2 = inner(&*g, &f, &f);
        assert!((l2 / (2.0 * PI).powf(1.5) - 1.0).abs() < 1e-10, "{l2}");
        // ||grad f||^2 = int |x|^2/4 exp(-|x|^2/2) = 3/4 (2 pi)^{3/2}
        let gs = grad_sq(&*g, &f);
        assert!((gs / (0.75 * (2.0 * PI).powf(1.5)) - 1.0).abs() < 5e-3, "{gs}");
    }

    #[test]
    fn partials_along_each_axis() {
        let g = BoxGridSpec {
            half_width: 8.0,
            m: 32,
            spacing: Spacing::Uniform,
        }
        .build()
        .unwrap();
        let f = g.sample(|p| (0.3 * p[0] - 0.2 * p[1] + 0.1 * p[2]).sin());
        for (dir, coef) in [(0usize, 0.3), (1, -0.2), (2, 0.1)] {
            let d = g.partial(&f, dir);
            for idx in (0..g.len()).step_by(97) {
                let p = g.point(idx);
                let exact = coef * (0.3 * p[0] - 0.2 * p[1] + 0.1 * p[2]).cos();
                assert!((d[idx] - exact).abs() < 1e-5, "dir {dir} at {p:?}");
            }
        }
    }
}
