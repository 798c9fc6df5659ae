//! Splitting of the modulation residual into the hyperbolic modes, the
//! translation modes and the remainder `gamma`, plus the energy expansion
//! pieces that act on it.

use serde::Serialize;

use super::fit::{solve_dense, ModulationFit};
use super::frame::Frame;
use crate::error::Result;
use crate::field::domain::{abs_pow, grad_inner, grad_sq, inner, Domain};
use crate::field::ground::{crit_exponent, exponent_p, w_value, ResolutionFloor};
use crate::field::state::Pair;
use crate::spectral::SpectralData;

/// `v = lambda_+ g+ + lambda_- g- + mu . grad W + gamma`, all in the lab frame.
#[derive(Clone, Debug, Serialize)]
pub struct ModeSplit<G: Domain> {
    pub lambda_plus: f64,
    pub lambda_minus: f64,
    pub lambda1: f64,
    pub lambda2: f64,
    pub mu: Vec<f64>,
    pub alpha: f64,
    pub k: f64,
    /// `<L gamma | gamma>`.
    pub gamma_form: f64,
    pub gamma_norm: f64,
    #[serde(skip)]
    pub gamma: Pair<G>,
}

/// `(lambda_+, lambda_-)` from `(lambda_1, lambda_2)`.
pub fn hyperbolic_coordinates(k: f64, lambda1: f64, lambda2: f64) -> (f64, f64) {
    let c = (k / 2.0).sqrt();
    (c * (lambda1 + lambda2 / k), c * (lambda1 - lambda2 / k))
}

/// `<L f|f> = ||grad f1||^2 - <V f1|f1> + ||f2||^2` with the lab potential.
fn lab_form<G: Domain>(grid: &G, potential: &[f64], f1: &[f64], f2: &[f64]) -> f64 {
    let vf: Vec<f64> = potential.iter().zip(f1).map(|(v, f)| v * f).collect();
    grad_sq(grid, f1) - inner(grid, &vf, f1) + inner(grid, f2, f2)
}

/// Projects the fit residual onto the modes of the linearized flow.
pub fn split_modes<G: Domain + ResolutionFloor>(
    spec: &SpectralData,
    fit: &ModulationFit<G>,
) -> Result<ModeSplit<G>> {
    let grid = &*fit.v.grid;
    let frame = Frame::new(grid, spec, fit.params.sigma, &fit.params.c)?;
    let (x1, x2) = (&fit.v.u1, &fit.v.u2);

    // Dual pairs (a = -1 against a = 1, a = 0 against itself) normalized on
    // the grid so that the removal below is exact.
    let rho_m1 = frame.rho(-1.0);
    let rho_p1 = frame.rho(1.0);
    let rho_0 = frame.rho(0.0);
    let lambda1 = inner(grid, x1, &rho_p1) / inner(grid, &rho_m1, &rho_p1);
    let lambda2 = inner(grid, x2, &rho_0) / inner(grid, &rho_0, &rho_0);
    let alpha = inner(grid, x1, &frame.lambda0_rho(1.0));

    let dw = frame.w_grad();
    let drho = frame.grad_rho(1.0);
    let m = dw.len();
    let mu = if m == 0 {
        Vec::new()
    } else {
        let gram: Vec<Vec<f64>> = drho
            .iter()
            .map(|r| dw.iter().map(|w| inner(grid, w, r)).collect())
            .collect();
        let rhs: Vec<f64> = drho.iter().map(|r| inner(grid, x1, r)).collect();
        solve_dense(gram, rhs).unwrap_or_else(|| vec![0.0; m])
    };

    let mut g1: Vec<f64> = x1.iter().zip(&rho_m1).map(|(x, r)| x - lambda1 * r).collect();
    for (mj, wj) in mu.iter().zip(&dw) {
        g1.iter_mut().zip(wj).for_each(|(g, w)| *g -= mj * w);
    }
    let g2: Vec<f64> = x2.iter().zip(&rho_0).map(|(x, r)| x - lambda2 * r).collect();
    let gamma_form = lab_form(grid, &frame.potential(), &g1, &g2);
    let gamma = Pair::new(fit.v.grid.clone(), g1, g2)?;
    let (lambda_plus, lambda_minus) = hyperbolic_coordinates(spec.k, lambda1, lambda2);
    Ok(ModeSplit {
        lambda_plus,
        lambda_minus,
        lambda1,
        lambda2,
        mu,
        alpha,
        k: spec.k,
        gamma_form,
        gamma_norm: gamma.energy_norm(),
        gamma,
    })
}

/// `||v||_E^2 = (k^2 lambda_1^2 + lambda_2^2)/2 + <L gamma|gamma>/2 + alpha^2 + |mu|^2`.
pub fn linearized_norm_sq<G: Domain>(ms: &ModeSplit<G>) -> f64 {
    let k = ms.k;
    0.5 * (k * k * ms.lambda1 * ms.lambda1 + ms.lambda2 * ms.lambda2)
        + 0.5 * ms.gamma_form
        + ms.alpha * ms.alpha
        + ms.mu.iter().map(|m| m * m).sum::<f64>()
}

/// Superquadratic remainder
/// `C(v) = 1/2* int |W+v1|^{2*} - W^{2*} - 2* W^p v1 - 2*(2*-1)/2 W^{2*-2} v1^2`
/// with `W` centred at unit scale.
pub fn superquadratic_c<G: Domain>(grid: &G, v1: &[f64]) -> f64 {
    let d = grid.dim();
    let q = crit_exponent(d);
    let p = exponent_p(d);
    let radii = grid.radii(&vec![0.0; grid.translation_dims()]);
    let w = grid.weights();
    radii
        .iter()
        .zip(v1)
        .zip(w)
        .map(|((&r, &v), &wt)| {
            let wv = w_value(d, r);
            let full = abs_pow(wv + v, q) - wv.powf(q) - q * wv.powf(p) * v
                - 0.5 * q * (q - 1.0) * wv.powf(q - 2.0) * v * v;
            wt * full
        })
        .sum::<f64>()
        / q
}

/// `E(u) - J(W)` computed from the fit residual without cancellation:
/// with `y = s x1`,
/// `<grad W|grad y> - <W^p|y> + ||grad y||^2/2 + ||u2||^2/2
///  - 1/2* int (|W+y|^{2*} - W^{2*} - 2* W^p y)`.
pub fn excess_energy<G: Domain + ResolutionFloor>(
    spec: &SpectralData,
    fit: &ModulationFit<G>,
) -> Result<f64> {
    let grid = &*fit.v.grid;
    let frame = Frame::new(grid, spec, fit.params.sigma, &fit.params.c)?;
    let d = grid.dim();
    let q = crit_exponent(d);
    let p = exponent_p(d);
    let s = fit.params.sign;
    let wl = frame.w();
    let y: Vec<f64> = fit.v.u1.iter().map(|x| s * x).collect();
    let wts = grid.weights();
    let mut lin = 0.0;
    let mut rem = 0.0;
    for i in 0..y.len() {
        let (wv, yv) = (wl[i], y[i]);
        let wp = wv.powf(p);
        lin += wts[i] * wp * yv;
        rem += wts[i] * (abs_pow(wv + yv, q) - wv.powf(q) - q * wp * yv);
    }
    Ok(grad_inner(grid, &wl, &y) - lin + 0.5 * grad_sq(grid, &y)
        + 0.5 * inner(grid, &fit.v.u2, &fit.v.u2)
        - rem / q)
}
