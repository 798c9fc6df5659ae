//! Static and dynamic functionals: `J`, `K`, energy, momentum, the energy
//! density, localized centre of energy, and the symplectic form.

use super::domain::{abs_pow, dot, grad_sq, inner, power_integral, Domain};
use super::ground::crit_exponent;
use super::state::Pair;

/// `J(f) = int 1/2 |grad f|^2 - |f|^{2*}/2*`.
pub fn functional_j<G: Domain + ?Sized>(grid: &G, f: &[f64]) -> f64 {
    let q = crit_exponent(grid.dim());
    0.5 * grad_sq(grid, f) - power_integral(grid, f, q) / q
}

/// `K(f) = int |grad f|^2 - |f|^{2*}`.
pub fn functional_k<G: Domain + ?Sized>(grid: &G, f: &[f64]) -> f64 {
    let q = crit_exponent(grid.dim());
    grad_sq(grid, f) - power_integral(grid, f, q)
}

/// `(||grad f||^2, int |f|^{2*})`, from which `J` and `K` both follow.
pub fn gradient_and_potential<G: Domain + ?Sized>(grid: &G, f: &[f64]) -> (f64, f64) {
    (grad_sq(grid, f), power_integral(grid, f, crit_exponent(grid.dim())))
}

/// `E(u) = 1/2 ||u||_H^2 - ||u1||_{2*}^{2*} / 2*`.
pub fn energy<G: Domain>(s: &Pair<G>) -> f64 {
    let g = &*s.grid;
    functional_j(g, &s.u1) + 0.5 * inner(g, &s.u2, &s.u2)
}

/// `P(u) = <u2 | grad u1>`; identically zero on radial grids.
pub fn momentum<G: Domain>(s: &Pair<G>) -> Vec<f64> {
    let g = &*s.grid;
    if g.translation_dims() == 0 {
        return vec![0.0; g.dim()];
    }
    g.gradient(&s.u1)
        .iter()
        .map(|gj| dot(g.weights(), &s.u2, gj))
        .collect()
}

/// Pointwise `e(u) = (|u2|^2 + |grad u1|^2)/2 - |u1|^{2*}/2*`.
pub fn energy_density<G: Domain>(s: &Pair<G>) -> Vec<f64> {
    let g = &*s.grid;
    let q = crit_exponent(g.dim());
    let grads = g.gradient(&s.u1);
    (0..g.len())
        .map(|i| {
            let gg: f64 = grads.iter().map(|c| c[i] * c[i]).sum();
            0.5 * (s.u2[i] * s.u2[i] + gg) - abs_pow(s.u1[i], q) / q
        })
        .collect()
}

/// `C^infinity` step: 1 for `x <= a`, 0 for `x >= b`.
pub fn smooth_step(x: f64, a: f64, b: f64) -> f64 {
    if x <= a {
        return 1.0;
    }
    if x >= b {
        return 0.0;
    }
    let s = (x - a) / (b - a);
    let f = |t: f64| if t > 0.0 { (-1.0 / t).exp() } else { 0.0 };
    f(1.0 - s) / (f(1.0 - s) + f(s))
}

/// Spatial cutoff `w(x) = chi(|x| / radius)` with `chi = 1` on `[0, 1.5]`
/// and `chi = 0` beyond 2.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Cutoff {
    pub radius: f64,
}

impl Cutoff {
    pub fn everywhere() -> Self {
        Self {
            radius: f64::INFINITY,
        }
    }

    pub fn at(&self, r: f64) -> f64 {
        if self.radius.is_infinite() {
            1.0
        } else {
            smooth_step(r / self.radius, 1.5, 2.0)
        }
    }

    /// `(w, dw/dr)` at `r`.
    pub fn with_derivative(&self, r: f64) -> (f64, f64) {
        if self.radius.is_infinite() {
            return (1.0, 0.0);
        }
        let h = 1e-6 * self.radius;
        let dw = (self.at(r + h) - self.at(r - h)) / (2.0 * h);
        (self.at(r), dw)
    }
}

/// Localized centre of energy `<x w | e(u)>`.
pub fn center_of_energy<G: Domain>(s: &Pair<G>, cutoff: &Cutoff) -> Vec<f64> {
    let g = &*s.grid;
    let d = g.dim();
    if g.translation_dims() == 0 {
        return vec![0.0; d];
    }
    let e = energy_density(s);
    let origin = vec![0.0; d];
    let radii = g.radii(&origin);
    let w = g.weights();
    (0..d)
        .map(|j| {
            let xj = g.offsets(&origin, j);
            (0..g.len())
                .map(|i| w[i] * xj[i] * cutoff.at(radii[i]) * e[i])
                .sum()
        })
        .collect()
}

/// `||u||_H^2` restricted to `|x| > radius` (plus the exterior tail).
pub fn exterior_norm_sq<G: Domain>(s: &Pair<G>, radius: f64) -> f64 {
    let g = &*s.grid;
    let radii = g.radii(&vec![0.0; g.translation_dims()]);
    let grads = g.gradient(&s.u1);
    let w = g.weights();
    let interior: f64 = (0..g.len())
        .filter(|&i| radii[i] > radius)
        .map(|i| {
            let gg: f64 = grads.iter().map(|c| c[i] * c[i]).sum();
            w[i] * (gg + s.u2[i] * s.u2[i])
        })
        .sum();
    interior + g.exterior_grad(&s.u1, &s.u1)
}

/// `omega(a, b) = <a2 | b1> - <a1 | b2>`.
pub fn omega<G: Domain + ?Sized>(grid: &G, a: (&[f64], &[f64]), b: (&[f64], &[f64])) -> f64 {
    inner(grid, a.1, b.0) - inner(grid, a.0, b.1)
}

/// `omega` on two states sharing a grid.
pub fn symplectic_omega<G: Domain>(a: &Pair<G>, b: &Pair<G>) -> f64 {
    omega(&*a.grid, (&a.u1, &a.u2), (&b.u1, &b.u2))
}
