//! Tabulated even radial profiles with fast evaluation off the grid.

use serde::{Deserialize, Serialize};

use crate::field::axis::Spacing;
use crate::field::radial::{RadialGrid, RadialGridSpec};
use crate::error::{Error, Result};

/// An even function of `r` tabulated at `r_j = (j + 1/2) h` together with
/// its derivative; zero beyond the table.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RadialProfile {
    d: usize,
    h: f64,
    values: Vec<f64>,
    slopes: Vec<f64>,
}

// Lagrange weights for six nodes at offsets -2..=3 from the base node.
#[inline]
fn lagrange6(t: f64) -> [f64; 6] {
    let x = [-2.0, -1.0, 0.0, 1.0, 2.0, 3.0];
    let mut w = [0.0; 6];
    for i in 0..6 {
        let mut num = 1.0;
        let mut den = 1.0;
        for j in 0..6 {
            if j != i {
                num *= t - x[j];
                den *= x[i] - x[j];
            }
        }
        w[i] = num / den;
    }
    w
}

impl RadialProfile {
    /// Builds a profile from samples on a uniform radial grid.
    pub fn from_uniform(grid: &RadialGrid, values: Vec<f64>) -> Result<Self> {
        if grid.spec().spacing != Spacing::Uniform {
            return Err(Error::InvalidGrid("profiles need a uniform grid".into()));
        }
        if values.len() != grid.nodes().len() {
            return Err(Error::GridMismatch);
        }
        let slopes = grid.derivative(&values);
        Ok(Self {
            d: grid.d(),
            h: grid.r_max() / grid.nodes().len() as f64,
            values,
            slopes,
        })
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn spacing(&self) -> f64 {
        self.h
    }

    pub fn r_max(&self) -> f64 {
        self.h * self.values.len() as f64
    }

    pub fn table(&self) -> &[f64] {
        &self.values
    }

    /// The uniform grid the profile is tabulated on.
    pub fn grid_spec(&self) -> RadialGridSpec {
        RadialGridSpec::uniform(self.d, self.r_max(), self.values.len())
    }

    pub fn scaled(&self, a: f64) -> Self {
        Self {
            d: self.d,
            h: self.h,
            values: self.values.iter().map(|v| a * v).collect(),
            slopes: self.slopes.iter().map(|v| a * v).collect(),
        }
    }

    #[inline]
    fn lookup(table: &[f64], j: isize, odd: bool) -> f64 {
        if j >= 0 {
            table.get(j as usize).copied().unwrap_or(0.0)
        } else {
            let v = table[(-1 - j) as usize];
            if odd {
                -v
            } else {
                v
            }
        }
    }

    /// `(f(r), f'(r))`.
    #[inline]
    pub fn eval(&self, r: f64) -> (f64, f64) {
        let r = r.abs();
        let n = self.values.len();
        let pos = r / self.h - 0.5;
        let base = pos.floor();
        if base as usize + 3 >= n {
            // within three cells of the table end the profile is negligible
            return (0.0, 0.0);
        }
        let w = lagrange6(pos - base);
        let b = base as isize;
        let mut f = 0.0;
        let mut df = 0.0;
        for (k, wk) in w.iter().enumerate() {
            let j = b - 2 + k as isize;
            f += wk * Self::lookup(&self.values, j, false);
            df += wk * Self::lookup(&self.slopes, j, true);
        }
        (f, df)
    }

    pub fn value(&self, r: f64) -> f64 {
        self.eval(r).0
    }
}
