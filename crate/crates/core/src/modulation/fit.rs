//! Solves the orthogonality conditions `<v1 | Lambda_0 rho> = <v1 | grad rho> = 0`
//! for the frame `(sigma, c)` of a state near the soliton family.
//!
//! All pairings are taken in the lab frame: `<v1 | f>` equals
//! `<u1 - s W_{sigma,c} | T^c S_1^sigma f>`, so no field is resampled.

use super::frame::{Frame, FrameParams};
use super::search::{search_distance, DistanceSearch};
use super::settings::ModulationSettings;
use crate::error::{Error, Result};
use crate::field::domain::{grad_sq, inner, Domain};
use crate::field::ground::ResolutionFloor;
use crate::field::state::Pair;
use crate::spectral::SpectralData;

/// Frame and residual of a converged modulation solve.
#[derive(Clone, Debug)]
pub struct ModulationFit<G: Domain> {
    pub params: FrameParams,
    /// Residual `u - s W_{sigma,c}` sampled in the lab, i.e. `T^c S^sigma v`.
    /// Its `H` norm equals that of the frame residual `v`.
    pub v: Pair<G>,
    pub converged: bool,
    pub newton_iters: usize,
    /// `(<v1|Lambda_0 rho>, <v1|d_j rho>...)` at the solution.
    pub orthogonality: Vec<f64>,
}

impl<G: Domain> ModulationFit<G> {
    pub fn sign(&self) -> f64 {
        self.params.sign
    }

    pub fn sigma(&self) -> f64 {
        self.params.sigma
    }

    pub fn c(&self) -> &[f64] {
        &self.params.c
    }
}

struct Residual {
    f: Vec<f64>,
    x1: Vec<f64>,
}

fn residual<G: Domain + ResolutionFloor>(
    spec: &SpectralData,
    state: &Pair<G>,
    sign: f64,
    theta: &[f64],
) -> Result<Residual> {
    let g = &*state.grid;
    let frame = Frame::new(g, spec, theta[0], &theta[1..])?;
    let w = frame.w();
    let x1: Vec<f64> = state.u1.iter().zip(&w).map(|(u, w)| u - sign * w).collect();
    let mut f = vec![inner(g, &x1, &frame.lambda0_rho(1.0))];
    for gj in frame.grad_rho(1.0) {
        f.push(inner(g, &x1, &gj));
    }
    Ok(Residual { f, x1 })
}

/// Solves `A x = b` for a small dense system with partial pivoting.
pub(crate) fn solve_dense(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Option<Vec<f64>> {
    let n = b.len();
    for col in 0..n {
        let piv = (col..n).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))?;
        if a[piv][col].abs() < 1e-300 {
            return None;
        }
        a.swap(col, piv);
        b.swap(col, piv);
        for row in col + 1..n {
            let m = a[row][col] / a[col][col];
            for k in col..n {
                a[row][k] -= m * a[col][k];
            }
            b[row] -= m * b[col];
        }
    }
    let mut x = vec![0.0; n];
    for i in (0..n).rev() {
        let s: f64 = (i + 1..n).map(|k| a[i][k] * x[k]).sum();
        x[i] = (b[i] - s) / a[i][i];
    }
    Some(x)
}

fn max_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

/// Absolute floor on the orthogonality residual, for states on the manifold.
const ABS_FLOOR: f64 = 1e-13;

/// Damped Broyden iteration from `start`, seeded with the Jacobian the map
/// has on the manifold: `s diag(-b_W, e^sigma a_W, ...)`.
pub fn solve_frame<G: Domain + ResolutionFloor>(
    spec: &SpectralData,
    state: &Pair<G>,
    settings: &ModulationSettings,
    start: &FrameParams,
) -> Result<ModulationFit<G>> {
    let g = &*state.grid;
    let sign = start.sign;
    let n = 1 + start.c.len();
    let mut theta: Vec<f64> = std::iter::once(start.sigma).chain(start.c.iter().copied()).collect();
    let mut jac = vec![vec![0.0; n]; n];
    jac[0][0] = -sign * spec.b_w;
    for j in 1..n {
        jac[j][j] = sign * start.sigma.exp() * spec.a_w;
    }

    let mut cur = residual(spec, state, sign, &theta)?;
    let mut iters = 0;
    loop {
        let norm_x = (grad_sq(g, &cur.x1) + inner(g, &state.u2, &state.u2)).max(0.0).sqrt();
        let err = max_abs(&cur.f);
        if err <= settings.tol_orth * norm_x + ABS_FLOOR {
            let v = Pair::new(state.grid.clone(), cur.x1, state.u2.clone())?;
            return Ok(ModulationFit {
                params: FrameParams {
                    sign,
                    sigma: theta[0],
                    c: theta[1..].to_vec(),
                },
                v,
                converged: true,
                newton_iters: iters,
                orthogonality: cur.f,
            });
        }
        if iters >= settings.max_iters {
            return Err(Error::NoConvergence {
                iters,
                residual: err,
            });
        }
        iters += 1;

        let step = solve_dense(jac.clone(), cur.f.iter().map(|v| -v).collect())
            .ok_or_else(|| Error::NoConvergence { iters, residual: err })?;
        let mut scale = 1.0;
        let mut next = None;
        for _ in 0..12 {
            let trial: Vec<f64> = theta.iter().zip(&step).map(|(t, s)| t + scale * s).collect();
            match residual(spec, state, sign, &trial) {
                Ok(r) if max_abs(&r.f) < err => {
                    next = Some((trial, r));
                    break;
                }
                Ok(r) if scale < 1e-3 => {
                    next = Some((trial, r));
                    break;
                }
                _ => scale *= 0.5,
            }
        }
        let Some((trial, r)) = next else {
            return Err(Error::NoConvergence {
                iters,
                residual: err,
            });
        };
        // Broyden rank-one update with the step actually taken.
        let dtheta: Vec<f64> = trial.iter().zip(&theta).map(|(a, b)| a - b).collect();
        let df: Vec<f64> = r.f.iter().zip(&cur.f).map(|(a, b)| a - b).collect();
        let dd: f64 = dtheta.iter().map(|v| v * v).sum();
        if dd > 0.0 {
            for i in 0..n {
                let jd: f64 = (0..n).map(|k| jac[i][k] * dtheta[k]).sum();
                let coef = (df[i] - jd) / dd;
                for k in 0..n {
                    jac[i][k] += coef * dtheta[k];
                }
            }
        }
        theta = trial;
        cur = r;
    }
}

/// Finds sign and a starting frame by distance minimization, then solves the
/// orthogonality conditions. `seed` is an optional previous frame.
pub fn fit_modulation<G: Domain + ResolutionFloor>(
    spec: &SpectralData,
    state: &Pair<G>,
    settings: &ModulationSettings,
    seed: Option<&FrameParams>,
) -> Result<ModulationFit<G>> {
    let search = search_distance(spec, state, settings, seed)?;
    fit_from_search(spec, state, settings, &search)
}

/// Modulation solve starting from an existing distance search.
pub fn fit_from_search<G: Domain + ResolutionFloor>(
    spec: &SpectralData,
    state: &Pair<G>,
    settings: &ModulationSettings,
    search: &DistanceSearch,
) -> Result<ModulationFit<G>> {
    search.check_sign(settings.sign_ratio)?;
    solve_frame(spec, state, settings, &search.best().params)
}

/// Removes from `f` the components that violate the orthogonality conditions
/// in the frame `params`, along `T^c S_{-1}^sigma (Lambda_0 rho, grad rho)`.
pub fn project_orthogonal<G: Domain + ResolutionFloor>(
    spec: &SpectralData,
    grid: &G,
    params: &FrameParams,
    f: &[f64],
) -> Result<Vec<f64>> {
    let frame = Frame::new(grid, spec, params.sigma, &params.c)?;
    let mut dirs = vec![frame.lambda0_rho(-1.0)];
    dirs.extend(frame.grad_rho(-1.0));
    let mut tests = vec![frame.lambda0_rho(1.0)];
    tests.extend(frame.grad_rho(1.0));
    let gram: Vec<Vec<f64>> = tests
        .iter()
        .map(|t| dirs.iter().map(|d| inner(grid, d, t)).collect())
        .collect();
    let rhs: Vec<f64> = tests.iter().map(|t| inner(grid, f, t)).collect();
    let coef = solve_dense(gram, rhs).ok_or_else(|| Error::Consistency("singular frame Gram matrix".into()))?;
    let mut out = f.to_vec();
    for (c, d) in coef.iter().zip(&dirs) {
        out.iter_mut().zip(d).for_each(|(o, v)| *o -= c * v);
    }
    Ok(out)
}

/// `T^c S^sigma (s W, 0) + (v1, v2)` with `(v1, v2)` given in the lab.
pub fn assemble<G: Domain + ResolutionFloor>(
    spec: &SpectralData,
    grid: &std::sync::Arc<G>,
    params: &FrameParams,
    v1: &[f64],
    v2: &[f64],
) -> Result<Pair<G>> {
    let w = Frame::radial_only(&**grid, spec, params.sigma, &params.c)?.w();
    let u1 = w.iter().zip(v1).map(|(w, v)| params.sign * w + v).collect();
    Pair::new(grid.clone(), u1, v2.to_vec())
}
