//! Profiles of the soliton frame sampled in the lab: `T^c S_a^sigma f` for
//! `W`, `rho` and their derivatives.

use rayon::prelude::*;

use crate::error::Result;
use crate::field::domain::Domain;
use crate::field::ground::{check_resolution, exponent_p, w_dr, w_value, ResolutionFloor};
use crate::spectral::SpectralData;

/// Sign, scale and centre of a frame.
#[derive(Clone, Debug, PartialEq)]
pub struct FrameParams {
    pub sign: f64,
    pub sigma: f64,
    pub c: Vec<f64>,
}

impl FrameParams {
    pub fn identity(translation_dims: usize) -> Self {
        Self {
            sign: 1.0,
            sigma: 0.0,
            c: vec![0.0; translation_dims],
        }
    }
}

/// Grids at least this large are sampled in parallel.
const PARALLEL_LEN: usize = 1 << 15;

/// Geometry of one `(sigma, c)` frame on a grid.
pub(crate) struct Frame<'a, G: Domain> {
    grid: &'a G,
    spec: &'a SpectralData,
    d: f64,
    es: f64,
    sigma: f64,
    radii: Vec<f64>,
    offsets: Vec<Vec<f64>>,
}

impl<'a, G: Domain + ResolutionFloor> Frame<'a, G> {
    pub fn new(grid: &'a G, spec: &'a SpectralData, sigma: f64, c: &[f64]) -> Result<Self> {
        let mut frame = Self::radial_only(grid, spec, sigma, c)?;
        frame.offsets = (0..grid.translation_dims()).map(|j| grid.offsets(c, j)).collect();
        Ok(frame)
    }

    /// Frame without direction cosines; only the radial profiles are usable.
    pub fn radial_only(grid: &'a G, spec: &'a SpectralData, sigma: f64, c: &[f64]) -> Result<Self> {
        check_resolution(grid, sigma)?;
        let radii = grid.radii(c);
        let offsets = Vec::new();
        Ok(Self {
            grid,
            spec,
            d: grid.dim() as f64,
            es: sigma.exp(),
            sigma,
            radii,
            offsets,
        })
    }

    fn amp(&self, a: f64) -> f64 {
        (self.sigma * (self.d / 2.0 + a)).exp()
    }

    fn map_radial(&self, a: f64, f: impl Fn(f64) -> f64 + Sync) -> Vec<f64> {
        let amp = self.amp(a);
        if self.radii.len() >= PARALLEL_LEN {
            self.radii.par_iter().map(|&r| amp * f(self.es * r)).collect()
        } else {
            self.radii.iter().map(|&r| amp * f(self.es * r)).collect()
        }
    }

    /// `(x_j - c_j) / |x - c|` times `values`.
    fn directional(&self, values: &[f64]) -> Vec<Vec<f64>> {
        debug_assert_eq!(self.offsets.len(), self.grid.translation_dims());
        self.offsets
            .iter()
            .map(|off| {
                off.iter()
                    .zip(&self.radii)
                    .zip(values)
                    .map(|((o, r), v)| if *r > 0.0 { v * o / r } else { 0.0 })
                    .collect()
            })
            .collect()
    }

    /// `T^c S_{-1}^sigma W`.
    pub fn w(&self) -> Vec<f64> {
        let d = self.grid.dim();
        self.map_radial(-1.0, |r| w_value(d, r))
    }

    /// `T^c S_{-1}^sigma (d_j W)` for each translation direction.
    pub fn w_grad(&self) -> Vec<Vec<f64>> {
        let d = self.grid.dim();
        self.directional(&self.map_radial(-1.0, |r| w_dr(d, r)))
    }

    /// `T^c S_a^sigma rho`.
    pub fn rho(&self, a: f64) -> Vec<f64> {
        self.map_radial(a, |r| self.spec.rho_at(r).0)
    }

    /// `T^c S_a^sigma (Lambda_0 rho)`.
    pub fn lambda0_rho(&self, a: f64) -> Vec<f64> {
        let half_d = self.d / 2.0;
        self.map_radial(a, |r| {
            let (f, df) = self.spec.rho_at(r);
            r * df + half_d * f
        })
    }

    /// `T^c S_a^sigma (d_j rho)`.
    pub fn grad_rho(&self, a: f64) -> Vec<Vec<f64>> {
        self.directional(&self.map_radial(a, |r| self.spec.rho_at(r).1))
    }

    /// `p W_sigma(x - c)^{p-1}`, the lab potential of the linearized operator.
    pub fn potential(&self) -> Vec<f64> {
        let d = self.grid.dim();
        let p = exponent_p(d);
        // (W_sigma)^{p-1} = e^{2 sigma} W(e^sigma x)^{p-1}
        let amp = (2.0 * self.sigma).exp();
        self.radii
            .iter()
            .map(|&r| p * amp * w_value(d, self.es * r).powf(p - 1.0))
            .collect()
    }
}
