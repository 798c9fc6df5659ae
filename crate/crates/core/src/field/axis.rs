//! One-dimensional mapped axes.
//!
//! Every grid in the crate is built from a [`MappedAxis`]: nodes are
//! cell-centred in a computational coordinate `xi`, and the physical
//! coordinate is `x = phi(xi)` with `phi` odd (identity or a `sinh`
//! stretch). Radial grids use the half line with an even parity mirror at
//! the origin; box grids use the full line.

use serde::{Deserialize, Serialize};

/// Node placement rule.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Spacing {
    Uniform,
    /// `x = core * sinh(xi / core)`: spacing `dxi` near the origin,
    /// growing geometrically beyond `|x| ~ core`.
    Stretched { core: f64 },
}

impl Spacing {
    fn phi(&self, xi: f64) -> (f64, f64, f64) {
        match *self {
            Spacing::Uniform => (xi, 1.0, 0.0),
            Spacing::Stretched { core } => {
                let s = xi / core;
                (core * s.sinh(), s.cosh(), s.sinh() / core)
            }
        }
    }

    fn phi_inv(&self, x: f64) -> f64 {
        match *self {
            Spacing::Uniform => x,
            Spacing::Stretched { core } => core * (x / core).asinh(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) enum Extent {
    /// `[0, X]`, fields even in `x`.
    HalfLine,
    /// `[-X, X]`, fields assumed negligible at both ends.
    FullLine,
}

/// Finite-difference weights (Fornberg) for derivatives `0..=m` at `z`
/// using the nodes `xs`.
pub(crate) fn fornberg(z: f64, xs: &[f64], m: usize) -> Vec<Vec<f64>> {
    let n = xs.len();
    let mut c = vec![vec![0.0; n]; m + 1];
    let mut c1 = 1.0;
    let mut c4 = xs[0] - z;
    c[0][0] = 1.0;
    for i in 1..n {
        let mn = i.min(m);
        let mut c2 = 1.0;
        let c5 = c4;
        c4 = xs[i] - z;
        for j in 0..i {
            let c3 = xs[i] - xs[j];
            c2 *= c3;
            if j == i - 1 {
                for k in (1..=mn).rev() {
                    c[k][i] = c1 * (k as f64 * c[k - 1][i - 1] - c5 * c[k][i - 1]) / c2;
                }
                c[0][i] = -c1 * c5 * c[0][i - 1] / c2;
            }
            for k in (1..=mn).rev() {
                c[k][j] = (c4 * c[k][j] - k as f64 * c[k - 1][j]) / c3;
            }
            c[0][j] = c4 * c[0][j] / c3;
        }
        c1 = c2;
    }
    c
}

const D1: [f64; 7] = [-1.0, 9.0, -45.0, 0.0, 45.0, -9.0, 1.0];
const D1_DEN: f64 = 60.0;
const D2: [f64; 7] = [2.0, -27.0, 270.0, -490.0, 270.0, -27.0, 2.0];
const D2_DEN: f64 = 180.0;
const HALF: usize = 3;
const ONE_SIDED: usize = 8;

/// A 1-D cell-centred mapped grid with sixth-order differentiation and
/// end-corrected midpoint quadrature.
#[derive(Clone, Debug)]
pub struct MappedAxis {
    spacing: Spacing,
    extent: Extent,
    xi_max: f64,
    dxi: f64,
    xi: Vec<f64>,
    x: Vec<f64>,
    jac: Vec<f64>,
    jac2: Vec<f64>,
    /// Rows near the non-mirrored end(s): (node, start, d1 weights, d2 weights).
    edge_rows: Vec<(usize, usize, Vec<f64>, Vec<f64>)>,
    /// Midpoint weights in `xi` including Euler-Maclaurin end corrections.
    xi_weights: Vec<f64>,
}

impl MappedAxis {
    pub(crate) fn new(spacing: Spacing, extent: Extent, x_max: f64, n: usize) -> Self {
        let xi_max = spacing.phi_inv(x_max);
        let (lo, len) = match extent {
            Extent::HalfLine => (0.0, xi_max),
            Extent::FullLine => (-xi_max, 2.0 * xi_max),
        };
        let dxi = len / n as f64;
        let xi: Vec<f64> = (0..n).map(|i| lo + (i as f64 + 0.5) * dxi).collect();
        let mut x = Vec::with_capacity(n);
        let mut jac = Vec::with_capacity(n);
        let mut jac2 = Vec::with_capacity(n);
        for &s in &xi {
            let (a, b, c) = spacing.phi(s);
            x.push(a);
            jac.push(b);
            jac2.push(c);
        }

        let mut edge_rows = Vec::new();
        let mut push_rows = |nodes: std::ops::Range<usize>, start: usize| {
            let xs: Vec<f64> = (start..start + ONE_SIDED).map(|j| xi[j]).collect();
            for i in nodes {
                let w = fornberg(xi[i], &xs, 2);
                edge_rows.push((i, start, w[1].clone(), w[2].clone()));
            }
        };
        push_rows(n - HALF..n, n - ONE_SIDED);
        if extent == Extent::FullLine {
            push_rows(0..HALF, 0);
        }

        // Euler-Maclaurin corrections for the midpoint rule:
        //   int = h sum G + h^2/24 [G'] - 7 h^4/5760 [G''']
        let mut xi_weights = vec![dxi; n];
        let mut correct = |end: f64, start: usize, sign: f64| {
            let xs: Vec<f64> = (start..start + ONE_SIDED).map(|j| xi[j]).collect();
            let w = fornberg(end, &xs, 3);
            for (j, idx) in (start..start + ONE_SIDED).enumerate() {
                xi_weights[idx] += sign
                    * (dxi * dxi / 24.0 * w[1][j] - 7.0 * dxi.powi(4) / 5760.0 * w[3][j]);
            }
        };
        correct(lo + len, n - ONE_SIDED, 1.0);
        if extent == Extent::FullLine {
            correct(lo, 0, -1.0);
        }

        Self {
            spacing,
            extent,
            xi_max,
            dxi,
            xi,
            x,
            jac,
            jac2,
            edge_rows,
            xi_weights,
        }
    }

    pub fn len(&self) -> usize {
        self.x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }

    pub fn spacing(&self) -> Spacing {
        self.spacing
    }

    pub fn nodes(&self) -> &[f64] {
        &self.x
    }

    pub fn dxi(&self) -> f64 {
        self.dxi
    }

    /// Physical spacing around node `i`.
    pub fn local_spacing(&self, i: usize) -> f64 {
        self.jac[i] * self.dxi
    }

    pub fn min_spacing(&self) -> f64 {
        (0..self.len())
            .map(|i| self.local_spacing(i))
            .fold(f64::INFINITY, f64::min)
    }

    /// Outer edge of the last cell.
    pub fn outer(&self) -> f64 {
        self.spacing.phi(self.xi_max).0
    }

    /// Weights `q` with `int g(x) dx ~ sum q_i g(x_i)` over the axis extent.
    pub fn dx_weights(&self) -> Vec<f64> {
        self.xi_weights
            .iter()
            .zip(&self.jac)
            .map(|(w, j)| w * j)
            .collect()
    }

    #[inline]
    fn mirrored(&self, f: &[f64], j: isize) -> f64 {
        if j >= 0 {
            f[j as usize]
        } else {
            // even mirror about xi = 0 for cell-centred nodes
            f[(-1 - j) as usize]
        }
    }

    /// First and second derivatives with respect to `xi`.
    fn xi_derivatives(&self, f: &[f64], want_second: bool) -> (Vec<f64>, Vec<f64>) {
        let n = self.len();
        let mut d1 = vec![0.0; n];
        let mut d2 = if want_second { vec![0.0; n] } else { Vec::new() };
        let h = self.dxi;
        let lo = match self.extent {
            Extent::HalfLine => 0,
            Extent::FullLine => HALF,
        };
        for i in lo..n - HALF {
            let mut a = 0.0;
            let mut b = 0.0;
            for k in 0..7 {
                let j = i as isize + k as isize - HALF as isize;
                let v = self.mirrored(f, j);
                a += D1[k] * v;
                if want_second {
                    b += D2[k] * v;
                }
            }
            d1[i] = a / (D1_DEN * h);
            if want_second {
                d2[i] = b / (D2_DEN * h * h);
            }
        }
        for (i, start, w1, w2) in &self.edge_rows {
            let seg = &f[*start..*start + ONE_SIDED];
            d1[*i] = seg.iter().zip(w1).map(|(a, b)| a * b).sum();
            if want_second {
                d2[*i] = seg.iter().zip(w2).map(|(a, b)| a * b).sum();
            }
        }
        (d1, d2)
    }

    /// `df/dx` at the nodes.
    pub fn derivative(&self, f: &[f64]) -> Vec<f64> {
        let (d1, _) = self.xi_derivatives(f, false);
        d1.iter().zip(&self.jac).map(|(d, j)| d / j).collect()
    }

    /// `(df/dx, d2f/dx2)` at the nodes.
    pub fn derivatives2(&self, f: &[f64]) -> (Vec<f64>, Vec<f64>) {
        let (d1, d2) = self.xi_derivatives(f, true);
        let fx: Vec<f64> = d1.iter().zip(&self.jac).map(|(d, j)| d / j).collect();
        let fxx = (0..self.len())
            .map(|i| (d2[i] - d1[i] * self.jac2[i] / self.jac[i]) / (self.jac[i] * self.jac[i]))
            .collect();
        (fx, fxx)
    }

    /// Sixth-order Lagrange interpolation in `xi`. Returns `None` outside
    /// the node range on a non-mirrored end.
    pub fn interpolate(&self, f: &[f64], x: f64) -> Option<f64> {
        let n = self.len() as isize;
        let s = self.spacing.phi_inv(x);
        let lo = self.xi[0] - 0.5 * self.dxi;
        let pos = (s - lo) / self.dxi - 0.5;
        let tol = 1e-12 * self.dxi;
        if s > self.xi_max + tol || (self.extent == Extent::FullLine && s < -self.xi_max - tol) {
            return None;
        }
        let mut start = pos.floor() as isize - 2;
        if start + 6 > n {
            start = n - 6;
        }
        if self.extent == Extent::FullLine && start < 0 {
            start = 0;
        }
        let xs: Vec<f64> = (start..start + 6)
            .map(|j| {
                if j >= 0 {
                    self.xi[j as usize]
                } else {
                    -self.xi[(-1 - j) as usize]
                }
            })
            .collect();
        let w = fornberg(s, &xs, 0);
        Some(
            (0..6)
                .map(|k| w[0][k] * self.mirrored(f, start + k as isize))
                .sum(),
        )
    }

    /// Value at the outer edge extrapolated from the last nodes.
    pub fn value_at_outer(&self, f: &[f64]) -> f64 {
        let n = self.len();
        let start = n - ONE_SIDED;
        let xs: Vec<f64> = (start..n).map(|j| self.xi[j]).collect();
        let w = fornberg(self.xi_max, &xs, 0);
        (0..ONE_SIDED).map(|k| w[0][k] * f[start + k]).sum()
    }
}
