//! Scaling `S_a^sigma f(x) = e^{(d/2+a) sigma} f(e^sigma x)`, translation
//! `T^c f(x) = f(x - c)` and the generators `Lambda_a = x.grad + d/2 + a`,
//! realized by resampling on the grid.

use super::box3d::Box3DGrid;
use super::domain::Domain;
use super::ground::{check_resolution, ResolutionFloor};
use super::radial::RadialGrid;
use super::state::Pair;
use crate::error::{Error, Result};

pub trait Symmetries: Domain + ResolutionFloor + Sized {
    /// `S_a^sigma f`.
    fn scale_field(&self, f: &[f64], sigma: f64, a: f64) -> Result<Vec<f64>>;

    /// `T^c f`.
    fn translate_field(&self, f: &[f64], c: &[f64]) -> Result<Vec<f64>>;

    /// `Lambda_a f = x . grad f + (d/2 + a) f`.
    fn lambda(&self, f: &[f64], a: f64) -> Vec<f64>;
}

impl Symmetries for RadialGrid {
    fn scale_field(&self, f: &[f64], sigma: f64, a: f64) -> Result<Vec<f64>> {
        check_resolution(self, sigma)?;
        let es = sigma.exp();
        let amp = (sigma * (self.d() as f64 / 2.0 + a)).exp();
        // Only Hdot^1 data (a = -1) continue harmonically past the edge.
        let harmonic = a == -1.0;
        Ok(self
            .nodes()
            .iter()
            .map(|&r| amp * self.interpolate(f, es * r, harmonic))
            .collect())
    }

    fn translate_field(&self, f: &[f64], c: &[f64]) -> Result<Vec<f64>> {
        if c.iter().any(|v| *v != 0.0) {
            return Err(Error::Config("radial fields cannot be translated".into()));
        }
        Ok(f.to_vec())
    }

    fn lambda(&self, f: &[f64], a: f64) -> Vec<f64> {
        let df = self.derivative(f);
        let c = self.d() as f64 / 2.0 + a;
        self.nodes()
            .iter()
            .enumerate()
            .map(|(i, r)| r * df[i] + c * f[i])
            .collect()
    }
}

impl Box3DGrid {
    /// Resamples every line along `dir` with `new(x) = old(map(x))`.
    fn resample_axis(&self, f: &[f64], dir: usize, map: impl Fn(f64) -> f64) -> Vec<f64> {
        let m = self.m();
        let stride = [m * m, m, 1][dir];
        let ax = self.axis();
        let x = ax.nodes();
        let mut out = vec![0.0; f.len()];
        for l in 0..m * m {
            let (a, b) = (l / m, l % m);
            let start = match dir {
                0 => a * m + b,
                1 => a * m * m + b,
                _ => (a * m + b) * m,
            };
            let line: Vec<f64> = (0..m).map(|t| f[start + t * stride]).collect();
            for t in 0..m {
                out[start + t * stride] = ax.interpolate(&line, map(x[t])).unwrap_or(0.0);
            }
        }
        out
    }
}

impl Symmetries for Box3DGrid {
    fn scale_field(&self, f: &[f64], sigma: f64, a: f64) -> Result<Vec<f64>> {
        check_resolution(self, sigma)?;
        let es = sigma.exp();
        let mut g = f.to_vec();
        for dir in 0..3 {
            g = self.resample_axis(&g, dir, |x| es * x);
        }
        let amp = (sigma * (1.5 + a)).exp();
        g.iter_mut().for_each(|v| *v *= amp);
        Ok(g)
    }

    fn translate_field(&self, f: &[f64], c: &[f64]) -> Result<Vec<f64>> {
        if c.len() != 3 {
            return Err(Error::Config(format!("translation needs 3 components, got {}", c.len())));
        }
        let mut g = f.to_vec();
        for (dir, &cj) in c.iter().enumerate() {
            if cj != 0.0 {
                g = self.resample_axis(&g, dir, |x| x - cj);
            }
        }
        Ok(g)
    }

    fn lambda(&self, f: &[f64], a: f64) -> Vec<f64> {
        let grads = self.gradient(f);
        let c = 1.5 + a;
        (0..f.len())
            .map(|i| {
                let p = self.point(i);
                p[0] * grads[0][i] + p[1] * grads[1][i] + p[2] * grads[2][i] + c * f[i]
            })
            .collect()
    }
}

/// `(S_{-1}^sigma u1, S_0^sigma u2)`.
pub fn apply_scaling<G: Symmetries>(s: &Pair<G>, sigma: f64) -> Result<Pair<G>> {
    let u1 = s.grid.scale_field(&s.u1, sigma, -1.0)?;
    let u2 = s.grid.scale_field(&s.u2, sigma, 0.0)?;
    Pair::new(s.grid.clone(), u1, u2)
}

/// `(T^c u1, T^c u2)`.
pub fn apply_translation<G: Symmetries>(s: &Pair<G>, c: &[f64]) -> Result<Pair<G>> {
    let u1 = s.grid.translate_field(&s.u1, c)?;
    let u2 = s.grid.translate_field(&s.u2, c)?;
    Pair::new(s.grid.clone(), u1, u2)
}
