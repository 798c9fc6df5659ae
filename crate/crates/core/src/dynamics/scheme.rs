//! Method-of-lines discretization of the radial `d = 3` equation in the
//! variable `w = r u`, which turns it into `w_tt = w_rr + w^5 / r^4` on a
//! uniform cell-centred grid, and the time integrators acting on it.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::field::axis::Spacing;
use crate::field::domain::Domain;
use crate::field::radial::{RadialGrid, RadialGridSpec};
use crate::field::state::RadialState;
use crate::registry::Registry;

/// Uniform grid `r_i = (i + 1/2) h` on `(0, r_max]` for `w = r u`.
#[derive(Clone, Debug)]
pub struct WaveGrid {
    h: f64,
    r: Vec<f64>,
    inv_r4: Vec<f64>,
    absorbing: bool,
    radial: Arc<RadialGrid>,
}

impl WaveGrid {
    /// `absorbing` selects the first-order outgoing condition `w_t + w_r = 0`
    /// at `r_max`; otherwise the edge is reflecting (`w_r = 0`).
    pub fn new(r_max: f64, n: usize, absorbing: bool) -> Result<Self> {
        if n < 8 || !(r_max > 0.0) {
            return Err(Error::InvalidGrid(format!("wave grid n = {n}, r_max = {r_max}")));
        }
        let radial = RadialGridSpec::uniform(3, r_max, n).build()?;
        let r = radial.nodes().to_vec();
        let inv_r4 = r.iter().map(|r| r.powi(-4)).collect();
        Ok(Self {
            h: r_max / n as f64,
            r,
            inv_r4,
            absorbing,
            radial,
        })
    }

    pub fn len(&self) -> usize {
        self.r.len()
    }

    pub fn is_empty(&self) -> bool {
        self.r.is_empty()
    }

    pub fn spacing(&self) -> f64 {
        self.h
    }

    pub fn r_max(&self) -> f64 {
        self.radial.r_max()
    }

    pub fn nodes(&self) -> &[f64] {
        &self.r
    }

    pub fn absorbing(&self) -> bool {
        self.absorbing
    }

    /// The field-space grid sharing these nodes, on which `u = w / r` lives.
    pub fn radial(&self) -> &Arc<RadialGrid> {
        &self.radial
    }

    /// Same extent with twice the resolution.
    pub fn refined(&self) -> Result<Self> {
        Self::new(self.r_max(), 2 * self.len(), self.absorbing)
    }

    /// Value at index `j`, with odd reflection through the origin and the
    /// boundary condition past the edge. `v_edge` is `w_t` at the last node.
    #[inline]
    fn at(&self, w: &[f64], v_edge: f64, j: isize) -> f64 {
        let n = w.len() as isize;
        if j < 0 {
            -w[(-1 - j) as usize]
        } else if j >= n {
            let m = j - n;
            let mirror = w[(2 * n - 1 - j) as usize];
            if self.absorbing {
                // w(R + x) = w(R - x) + 2 x w_r(R) with w_r = -w_t.
                mirror - (2 * m + 1) as f64 * self.h * v_edge
            } else {
                mirror
            }
        } else {
            w[j as usize]
        }
    }

    /// `w_rr + w^5 / r^4` with the fourth-order five-point Laplacian.
    pub fn acceleration(&self, w: &[f64], v: &[f64], out: &mut [f64]) {
        let n = w.len();
        let c = 1.0 / (12.0 * self.h * self.h);
        let v_edge = v[n - 1];
        let lap = |a: f64, b: f64, m: f64, d: f64, e: f64| c * (-a + 16.0 * b - 30.0 * m + 16.0 * d - e);
        for i in 2..n - 2 {
            let wi = w[i];
            out[i] = lap(w[i - 2], w[i - 1], wi, w[i + 1], w[i + 2]) + wi.powi(5) * self.inv_r4[i];
        }
        for i in [0, 1, n - 2, n - 1] {
            let j = i as isize;
            let wi = w[i];
            out[i] = lap(
                self.at(w, v_edge, j - 2),
                self.at(w, v_edge, j - 1),
                wi,
                self.at(w, v_edge, j + 1),
                self.at(w, v_edge, j + 2),
            ) + wi.powi(5) * self.inv_r4[i];
        }
    }
}

/// `(w, w_t)` at time `t`.
#[derive(Clone, Debug)]
pub struct WaveState {
    pub t: f64,
    pub w: Vec<f64>,
    pub v: Vec<f64>,
}

impl WaveState {
    /// From `(u1, u2)` sampled on `grid.radial()`.
    pub fn from_pair(grid: &WaveGrid, s: &RadialState) -> Result<Self> {
        let g = &*s.grid;
        if g.len() != grid.len() || g.spec().spacing != Spacing::Uniform || (g.r_max() - grid.r_max()).abs() > 1e-12 {
            return Err(Error::GridMismatch);
        }
        let r = grid.nodes();
        Ok(Self {
            t: 0.0,
            w: r.iter().zip(&s.u1).map(|(r, u)| r * u).collect(),
            v: r.iter().zip(&s.u2).map(|(r, u)| r * u).collect(),
        })
    }

    pub fn to_pair(&self, grid: &WaveGrid) -> Result<RadialState> {
        let r = grid.nodes();
        RadialState::new(
            grid.radial().clone(),
            self.w.iter().zip(r).map(|(w, r)| w / r).collect(),
            self.v.iter().zip(r).map(|(v, r)| v / r).collect(),
        )
    }

    /// Resamples onto `target` (same extent, any resolution) through `u`.
    pub fn resample(&self, from: &WaveGrid, target: &WaveGrid) -> Result<Self> {
        let pair = self.to_pair(from)?;
        let g = &*pair.grid;
        let map = |u: &[f64]| -> Vec<f64> {
            target.nodes().iter().map(|&r| r * g.interpolate(u, r, true)).collect()
        };
        Ok(Self {
            t: self.t,
            w: map(&pair.u1),
            v: map(&pair.u2),
        })
    }

    /// `w_t -> -w_t`.
    pub fn time_reversed(&self) -> Self {
        Self {
            t: self.t,
            w: self.w.clone(),
            v: self.v.iter().map(|v| -v).collect(),
        }
    }

    /// `||u||_H^2 = 4 pi int (w_t^2 + w_r^2) dr` with first differences and
    /// the harmonic exterior; used for step-size control only.
    pub fn quick_norm_sq(&self, grid: &WaveGrid) -> f64 {
        let h = grid.spacing();
        let mut s = self.w[0] * self.w[0] * 2.0 / h;
        for i in 0..self.w.len() {
            s += self.v[i] * self.v[i] * h;
            if i + 1 < self.w.len() {
                let d = self.w[i + 1] - self.w[i];
                s += d * d / h;
            }
        }
        4.0 * std::f64::consts::PI * s
    }

    /// `max |u|`.
    pub fn sup_u(&self, grid: &WaveGrid) -> f64 {
        self.w
            .iter()
            .zip(grid.nodes())
            .map(|(w, r)| (w / r).abs())
            .fold(0.0, |a, b| if b.is_nan() || a.is_nan() { f64::NAN } else { a.max(b) })
    }

    pub fn is_finite(&self) -> bool {
        self.w.iter().chain(&self.v).all(|x| x.is_finite())
    }
}

/// One time step of the semi-discrete system.
pub trait Integrator: Send + Sync {
    fn name(&self) -> &'static str;
    fn order(&self) -> u32;
    fn step(&self, grid: &WaveGrid, s: &mut WaveState, dt: f64, scratch: &mut Vec<f64>);
}

fn verlet_step(grid: &WaveGrid, s: &mut WaveState, dt: f64, a: &mut Vec<f64>) {
    a.resize(s.w.len(), 0.0);
    grid.acceleration(&s.w, &s.v, a);
    s.v.iter_mut().zip(a.iter()).for_each(|(v, a)| *v += 0.5 * dt * a);
    s.w.iter_mut().zip(&s.v).for_each(|(w, v)| *w += dt * v);
    grid.acceleration(&s.w, &s.v, a);
    s.v.iter_mut().zip(a.iter()).for_each(|(v, a)| *v += 0.5 * dt * a);
    flush_tiny(&mut s.w);
    flush_tiny(&mut s.v);
    s.t += dt;
}

/// Values below this are set to zero after each step. Underflowing tails would
/// otherwise turn subnormal and slow the stencil by an order of magnitude.
const FLUSH_BELOW: f64 = 1e-200;

fn flush_tiny(x: &mut [f64]) {
    x.iter_mut().filter(|x| x.abs() < FLUSH_BELOW).for_each(|x| *x = 0.0);
}

/// Stormer-Verlet (kick-drift-kick leapfrog).
pub struct Verlet;

impl Integrator for Verlet {
    fn name(&self) -> &'static str {
        "verlet"
    }

    fn order(&self) -> u32 {
        2
    }

    fn step(&self, grid: &WaveGrid, s: &mut WaveState, dt: f64, scratch: &mut Vec<f64>) {
        verlet_step(grid, s, dt, scratch);
    }
}

/// Fourth-order triple-jump composition of Verlet steps.
pub struct Yoshida4;

impl Integrator for Yoshida4 {
    fn name(&self) -> &'static str {
        "yoshida4"
    }

    fn order(&self) -> u32 {
        4
    }

    fn step(&self, grid: &WaveGrid, s: &mut WaveState, dt: f64, scratch: &mut Vec<f64>) {
        let cbrt2 = 2f64.powf(1.0 / 3.0);
        let w1 = 1.0 / (2.0 - cbrt2);
        let w0 = -cbrt2 * w1;
        let t0 = s.t;
        for c in [w1, w0, w1] {
            verlet_step(grid, s, c * dt, scratch);
        }
        s.t = t0 + dt;
    }
}

pub fn integrator_registry() -> Registry<dyn Integrator> {
    let mut reg: Registry<dyn Integrator> = Registry::new("integrator");
    reg.register("verlet", |_| Ok(Box::new(Verlet) as Box<dyn Integrator>));
    reg.register("yoshida4", |_| Ok(Box::new(Yoshida4) as Box<dyn Integrator>));
    reg
}

/// Advances `s` by one step of `dt`.
pub fn step(integrator: &dyn Integrator, grid: &WaveGrid, s: &WaveState, dt: f64) -> WaveState {
    let mut out = s.clone();
    let mut scratch = Vec::new();
    integrator.step(grid, &mut out, dt, &mut scratch);
    out
}
