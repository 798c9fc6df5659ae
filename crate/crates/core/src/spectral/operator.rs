use std::sync::Arc;

use crate::field::domain::{grad_sq, inner};
use crate::field::ground::{exponent_p, w_value};
use crate::field::radial::RadialGrid;

use super::banded::SymBanded;

/// `L+ = -Laplace - p W^{p-1}` on spherically symmetric functions.
#[derive(Clone, Debug)]
pub struct LinearizedOperator {
    grid: Arc<RadialGrid>,
    potential: Vec<f64>,
}

/// `p W(r)^{p-1}`.
pub fn potential(d: usize, r: f64) -> f64 {
    let p = exponent_p(d);
    let w = w_value(d, r);
    match d {
        3 => p * (w * w) * (w * w),
        _ => p * w.powf(p - 1.0),
    }
}

impl LinearizedOperator {
    pub fn new(grid: Arc<RadialGrid>) -> Self {
        let d = grid.d();
        let potential = grid.sample(|r| potential(d, r));
        Self { grid, potential }
    }

    pub fn grid(&self) -> &Arc<RadialGrid> {
        &self.grid
    }

    pub fn potential(&self) -> &[f64] {
        &self.potential
    }

    pub fn apply(&self, f: &[f64]) -> Vec<f64> {
        let lap = self.grid.laplacian(f);
        lap.iter()
            .zip(f)
            .zip(&self.potential)
            .map(|((l, f), v)| -l - v * f)
            .collect()
    }

    /// `<L+ f | f>` in weak form, `||grad f||^2 - <V f | f>`.
    pub fn quadratic_form(&self, f: &[f64]) -> f64 {
        let vf: Vec<f64> = f.iter().zip(&self.potential).map(|(a, v)| a * v).collect();
        grad_sq(&*self.grid, f) - inner(&*self.grid, &vf, f)
    }
}

/// Fourth-order discretization of `L+` acting on `w = r^{(d-1)/2} u` at
/// the cell-centred nodes `(j + 1/2) h`, `j < n`:
/// `-w'' + ((d-1)(d-3)/(4 r^2) - V) w`, symmetric in the plain `dr` inner
/// product. The origin uses the parity of `w` (odd for `d = 3`, even for
/// `d = 5`); beyond the last node `w` is continued oddly (Dirichlet).
pub fn liouville_matrix(d: usize, h: f64, n: usize) -> SymBanded {
    let parity = if ((d - 1) / 2) % 2 == 1 { -1.0 } else { 1.0 };
    let cd = (d as f64 - 1.0) * (d as f64 - 3.0) / 4.0;
    let stencil = [-1.0, 16.0, -30.0, 16.0, -1.0];
    let scale = -1.0 / (12.0 * h * h);
    let mut a = SymBanded::zeros(n, 2);
    for i in 0..n {
        let r = (i as f64 + 0.5) * h;
        a.add(i, i, cd / (r * r) - potential(d, r));
        for (k, c) in stencil.iter().enumerate() {
            let j = i as isize + k as isize - 2;
            let (col, sign) = if j < 0 {
                ((-1 - j) as usize, parity)
            } else if j as usize >= n {
                (2 * n - 1 - j as usize, -1.0)
            } else {
                (j as usize, 1.0)
            };
            // the matrix is symmetric, so row i only fills its lower part
            if col <= i {
                a.add(i, col, scale * c * sign);
            }
        }
    }
    a
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::ground::w_prime;
    use crate::field::radial::RadialGridSpec;

    #[test]
    fn resonance_is_annihilated() {
        let g = RadialGridSpec::default_for(3).build().unwrap();
        let op = LinearizedOperator::new(g.clone());
        let wp = g.sample(|r| w_prime(3, r));
        let res = op.apply(&wp);
        let rel = inner(&*g, &res, &res).sqrt() / grad_sq(&*g, &wp).sqrt();
        assert!(rel < 1e-4, "{rel}");
    }

    #[test]
    fn far_bump_sees_only_the_laplacian() {
        let g = RadialGridSpec::default_for(3).build().unwrap();
        let op = LinearizedOperator::new(g.clone());
        let f = g.sample(|r| (-(r - 120.0).powi(2) / 50.0).exp());
        let lf = op.apply(&f);
        let lap = g.laplacian(&f);
        let diff: Vec<f64> = lf.iter().zip(&lap).map(|(a, b)| a + b).collect();
        let rel = (inner(&*g, &diff, &diff) / inner(&*g, &lap, &lap)).sqrt();
        assert!(rel < 1e-5, "{rel}");
    }

    #[test]
    fn matrix_matches_the_continuous_operator() {
        let (h, n) = (0.01, 800);
        let a = liouville_matrix(3, h, n);
        let w: Vec<f64> = (0..n)
            .map(|i| {
                let r = (i as f64 + 0.5) * h;
                r * (-r * r).exp()
            })
            .collect();
        let aw = a.matvec(&w);
        for (i, v) in aw.iter().enumerate() {
            let r = (i as f64 + 0.5) * h;
            let wpp = (4.0 * r.powi(3) - 6.0 * r) * (-r * r).exp();
            let exact = -wpp - potential(3, r) * w[i];
            assert!((v - exact).abs() < 1e-6, "r={r}: {v} vs {exact}");
        }
    }
}
