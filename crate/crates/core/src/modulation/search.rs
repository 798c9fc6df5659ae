//! Minimization of `||u -+ W_sigma(. - c)||_H` over sign, scale and centre.

use super::frame::{Frame, FrameParams};
use super::settings::ModulationSettings;
use crate::error::{Error, Result};
use crate::field::domain::{abs_pow, grad_sq, inner, Domain};
use crate::field::ground::{
    check_resolution, crit_exponent, exponent_p, ground_gradient_sq, w_value, ResolutionFloor,
};
use crate::field::state::Pair;
use crate::spectral::SpectralData;

/// Best frame for one sign and its raw (uncalibrated) distance.
#[derive(Clone, Debug)]
pub struct SignCandidate {
    pub params: FrameParams,
    pub dist: f64,
}

#[derive(Clone, Debug)]
pub struct DistanceSearch {
    pub plus: SignCandidate,
    pub minus: SignCandidate,
}

impl DistanceSearch {
    pub fn best(&self) -> &SignCandidate {
        if self.plus.dist <= self.minus.dist {
            &self.plus
        } else {
            &self.minus
        }
    }

    /// Errors when the two signs are within `ratio` of each other.
    pub fn check_sign(&self, ratio: f64) -> Result<()> {
        let (a, b) = (self.plus.dist, self.minus.dist);
        if (a - b).abs() < ratio * a.min(b) {
            return Err(Error::SignAmbiguity {
                plus: a,
                minus: b,
                threshold: ratio,
            });
        }
        Ok(())
    }
}

/// Maximizes `f` on `[a, b]` by golden section.
pub(crate) fn golden_max(f: impl FnMut(f64) -> f64, a: f64, b: f64, iters: usize) -> (f64, f64) {
    golden_max_until(f, a, b, iters, |_, _| false)
}

/// Golden section that also stops once `done(bracket_width, best_value)`.
fn golden_max_until(
    mut f: impl FnMut(f64) -> f64,
    mut a: f64,
    mut b: f64,
    iters: usize,
    done: impl Fn(f64, f64) -> bool,
) -> (f64, f64) {
    let g = (5f64.sqrt() - 1.0) / 2.0;
    let mut x1 = b - g * (b - a);
    let mut x2 = a + g * (b - a);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    for _ in 0..iters {
        if done(b - a, f1.max(f2)) {
            break;
        }
        if f1 >= f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - g * (b - a);
            f1 = f(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + g * (b - a);
            f2 = f(x2);
        }
    }
    if f1 >= f2 {
        (x1, f1)
    } else {
        (x2, f2)
    }
}

/// Relative bracket at which the exact radial finish stops. Away from the
/// soliton family the distance is quadratic at its minimum, so a bracket of
/// `1e-5 d` fixes `d` to ~1e-10 relative; near `d = 0` the minimum is a kink
/// and the rule never fires.
const FINISH_RELATIVE_BRACKET: f64 = 1e-5;

/// `||u - s W_sigma(. - c)||_H` evaluated directly on the sampled difference.
pub fn direct_distance<G: Domain + ResolutionFloor>(
    spec: &SpectralData,
    state: &Pair<G>,
    params: &FrameParams,
) -> Result<f64> {
    let g = &*state.grid;
    let w = Frame::radial_only(g, spec, params.sigma, &params.c)?.w();
    let diff: Vec<f64> = state.u1.iter().zip(&w).map(|(u, w)| u - params.sign * w).collect();
    Ok((grad_sq(g, &diff) + inner(g, &state.u2, &state.u2)).max(0.0).sqrt())
}

/// Centroid of `|u1|^{2*}`, the coarse centre seed.
fn centroid<G: Domain>(state: &Pair<G>) -> Vec<f64> {
    let g = &*state.grid;
    let n = g.translation_dims();
    if n == 0 {
        return Vec::new();
    }
    let q = crit_exponent(g.dim());
    let dens: Vec<f64> = state.u1.iter().map(|v| v.abs().powf(q)).collect();
    let mass = inner(g, &dens, &vec![1.0; g.len()]);
    if mass <= 0.0 {
        return vec![0.0; n];
    }
    let origin = vec![0.0; n];
    (0..n)
        .map(|j| inner(g, &dens, &g.offsets(&origin, j)) / mass)
        .collect()
}

struct Objective<'a, G: Domain> {
    spec: &'a SpectralData,
    state: &'a Pair<G>,
}

impl<G: Domain + ResolutionFloor> Objective<'_, G> {
    /// `<u1 | T^c S_1^sigma W^p> = <grad u1 | grad W_sigma(. - c)>`, fused so
    /// that no profile is materialized.
    fn overlap(&self, sigma: f64, c: &[f64]) -> f64 {
        let g = &*self.state.grid;
        if check_resolution(g, sigma).is_err() {
            return f64::NAN;
        }
        let d = g.dim();
        let p = exponent_p(d);
        let es = sigma.exp();
        let amp = (sigma * (d as f64 / 2.0 + 1.0)).exp();
        let w = g.weights();
        let u = &self.state.u1;
        let sum: f64 = (0..g.len())
            .filter(|&i| u[i] != 0.0)
            .map(|i| w[i] * u[i] * abs_pow(w_value(d, es * g.radius_at(c, i)), p))
            .sum();
        amp * sum
    }
}

/// Coarse scan in `sigma` at a fixed centre: `(sigma, overlap)` pairs.
fn scan<G: Domain + ResolutionFloor>(
    obj: &Objective<'_, G>,
    settings: &ModulationSettings,
    c: &[f64],
    seed: Option<&FrameParams>,
    hi: f64,
) -> Vec<(f64, f64)> {
    let mut sigmas = Vec::new();
    let mut s = settings.sigma_min;
    while s <= hi + 1e-12 {
        sigmas.push(s);
        s += settings.sigma_step;
    }
    if let Some(seed) = seed {
        if seed.sigma <= hi {
            sigmas.push(seed.sigma);
        }
    }
    sigmas
        .into_iter()
        .map(|s| (s, obj.overlap(s, c)))
        .filter(|(_, v)| v.is_finite())
        .collect()
}

fn refine<G: Domain + ResolutionFloor>(
    obj: &Objective<'_, G>,
    settings: &ModulationSettings,
    sign: f64,
    start: (f64, Vec<f64>),
    seed: Option<&FrameParams>,
    hi: f64,
) -> Result<SignCandidate> {
    let eval = |sigma: f64, c: &[f64]| {
        let v = sign * obj.overlap(sigma, c);
        if v.is_nan() {
            f64::NEG_INFINITY
        } else {
            v
        }
    };
    let (mut sigma, mut c) = start;
    let step = settings.sigma_step;
    let radial = c.is_empty();
    let sweeps = if radial { 1 } else { settings.centre_sweeps };
    // On radial grids the overlap optimum only has to land well inside the
    // bracket of the exact finish below.
    let overlap_iters = if radial { settings.golden_iters.min(RADIAL_OVERLAP_ITERS) } else { settings.golden_iters };
    let mut width_c = 0.5 * (-sigma).exp();
    for _ in 0..sweeps {
        let lo = sigma - step;
        let top = (sigma + step).min(hi);
        sigma = golden_max(|s| eval(s, &c), lo, top, overlap_iters).0;
        for j in 0..c.len() {
            let centre = c[j];
            let (best, _) = golden_max(
                |x| {
                    let mut cc = c.clone();
                    cc[j] = x;
                    eval(sigma, &cc)
                },
                centre - width_c,
                centre + width_c,
                settings.golden_iters,
            );
            c[j] = best;
        }
        width_c *= 0.25;
    }
    if !c.is_empty() {
        sigma = golden_max(|s| eval(s, &c), sigma - step, (sigma + step).min(hi), settings.golden_iters).0;
    }

    // The overlap misses the far tail on radial grids; finish on the exact
    // objective there, which is cheap.
    if radial {
        let half = 0.5 * step;
        let dist_at = |s: f64| {
            let p = FrameParams { sign, sigma: s, c: Vec::new() };
            direct_distance(obj.spec, obj.state, &p).map_or(f64::NEG_INFINITY, |d| -d)
        };
        let done = |width: f64, best: f64| width < FINISH_RELATIVE_BRACKET * -best;
        sigma = golden_max_until(dist_at, sigma - half, (sigma + half).min(hi), settings.golden_iters, done).0;
    }

    let mut best = FrameParams { sign, sigma, c };
    let mut dist = direct_distance(obj.spec, obj.state, &best)?;
    if let Some(seed) = seed {
        let candidate = FrameParams {
            sign,
            ..seed.clone()
        };
        if let Ok(d) = direct_distance(obj.spec, obj.state, &candidate) {
            if d < dist {
                dist = d;
                best = candidate;
            }
        }
    }
    Ok(SignCandidate { params: best, dist })
}

/// Golden iterations of the radial overlap stage: `0.618^12` of a full
/// step is well inside the half-step bracket of the exact finish.
const RADIAL_OVERLAP_ITERS: usize = 12;

/// Coarse estimates closer than this relative gap refine both signs.
const REFINE_BOTH: f64 = 0.5;

/// Searches both signs; `seed` (typically a previous fit) is used as an
/// extra candidate for scale and centre.
///
/// When the coarse scan already separates the signs clearly, only the nearer
/// one is refined and the other keeps its coarse (upper bound) distance.
pub fn search_distance<G: Domain + ResolutionFloor>(
    spec: &SpectralData,
    state: &Pair<G>,
    settings: &ModulationSettings,
    seed: Option<&FrameParams>,
) -> Result<DistanceSearch> {
    let g = &*state.grid;
    if state.u1.iter().chain(&state.u2).any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("state"));
    }
    let hi = settings.sigma_max.min(-g.resolution_floor().ln());
    let obj = Objective { spec, state };
    let c0 = match seed {
        Some(p) if p.c.len() == g.translation_dims() => p.c.clone(),
        _ => centroid(state),
    };
    let points = scan(&obj, settings, &c0, seed, hi);
    if points.is_empty() {
        return Err(Error::Resolution {
            scale: (-settings.sigma_min).exp(),
            spacing: g.resolution_floor(),
        });
    }
    let norm_sq = state.energy_norm_sq();
    let gw = ground_gradient_sq(g.dim());
    let coarse = |sign: f64| {
        let (s, v) = points
            .iter()
            .copied()
            .max_by(|a, b| (sign * a.1).total_cmp(&(sign * b.1)))
            .expect("non-empty scan");
        let dist = (norm_sq + gw - 2.0 * sign * v).max(0.0).sqrt();
        (s, dist)
    };
    let (sp, ep) = coarse(1.0);
    let (sm, em) = coarse(-1.0);
    let both = (ep - em).abs() < REFINE_BOTH * ep.max(em);
    let keep = |sign: f64, sigma: f64, dist: f64| SignCandidate {
        params: FrameParams {
            sign,
            sigma,
            c: c0.clone(),
        },
        dist,
    };
    let plus = if both || ep <= em {
        refine(&obj, settings, 1.0, (sp, c0.clone()), seed, hi)?
    } else {
        keep(1.0, sp, ep)
    };
    let minus = if both || em < ep {
        refine(&obj, settings, -1.0, (sm, c0.clone()), seed, hi)?
    } else {
        keep(-1.0, sm, em)
    };
    Ok(DistanceSearch { plus, minus })
}
