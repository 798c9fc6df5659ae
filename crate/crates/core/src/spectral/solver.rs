//! Ground state `(rho, k)` of `L+`: `L+ rho = -k^2 rho`, `rho > 0`.

use serde::{Deserialize, Serialize};

use super::operator::{liouville_matrix, potential};
use super::profile::RadialProfile;
use crate::error::{Error, Result};
use crate::field::ground::exponent_p;
use crate::field::radial::{sphere_area, RadialGridSpec};
use crate::registry::Registry;

/// Result of a ground-state solve; the profile has unit `L^2(R^d)` norm.
#[derive(Clone, Debug)]
pub struct GroundStateSolution {
    pub method: String,
    pub k: f64,
    pub profile: RadialProfile,
    pub iterations: usize,
    /// Solver-internal residual (eigen-residual or matching mismatch).
    pub residual: f64,
}

pub trait GroundStateSolver: Send + Sync {
    fn name(&self) -> &'static str;
    fn solve(&self, d: usize) -> Result<GroundStateSolution>;
}

/// Tunables shared by the registered solvers.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolverSettings {
    /// Uniform step of the eigen/shooting grid.
    pub h: f64,
    /// Truncation radius; `rho ~ e^{-k r}` is negligible beyond it.
    pub r_max: f64,
}

impl Default for SolverSettings {
    fn default() -> Self {
        Self { h: 0.005, r_max: 40.0 }
    }
}

pub fn solver_registry() -> Registry<dyn GroundStateSolver, SolverSettings> {
    let mut reg: Registry<dyn GroundStateSolver, SolverSettings> = Registry::new("ground-state solver");
    reg.register("inverse-iteration", |s: &SolverSettings| {
        Ok(Box::new(InverseIteration::new(*s)) as Box<dyn GroundStateSolver>)
    });
    reg.register("shooting", |s: &SolverSettings| {
        Ok(Box::new(Shooting::new(*s)) as Box<dyn GroundStateSolver>)
    });
    reg
}

fn node_count(s: &SolverSettings) -> Result<usize> {
    let n = (s.r_max / s.h).round() as usize;
    if n < 16 || !(s.h > 0.0) {
        return Err(Error::InvalidGrid(format!("eigen grid h={} r_max={}", s.h, s.r_max)));
    }
    Ok(n)
}

/// Turns `u` samples at `(j+1/2) h` into a unit-norm positive profile.
fn normalized_profile(d: usize, h: f64, mut u: Vec<f64>) -> Result<RadialProfile> {
    let n = u.len();
    let area = sphere_area(d);
    let norm_sq: f64 = u
        .iter()
        .enumerate()
        .map(|(j, v)| {
            let r = (j as f64 + 0.5) * h;
            area * h * v * v * r.powi(d as i32 - 1)
        })
        .sum();
    let sign = if u.iter().sum::<f64>() < 0.0 { -1.0 } else { 1.0 };
    let scale = sign / norm_sq.sqrt();
    u.iter_mut().for_each(|v| *v *= scale);
    let grid = RadialGridSpec::uniform(d, n as f64 * h, n).build()?;
    RadialProfile::from_uniform(&grid, u)
}

/// Shifted inverse iteration on the fourth-order Liouville form of `L+`.
#[derive(Clone, Debug)]
pub struct InverseIteration {
    settings: SolverSettings,
    tol: f64,
    max_iters: usize,
}

impl InverseIteration {
    pub fn new(settings: SolverSettings) -> Self {
        Self {
            settings,
            tol: 1e-13,
            max_iters: 500,
        }
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

impl GroundStateSolver for InverseIteration {
    fn name(&self) -> &'static str {
        "inverse-iteration"
    }

    fn solve(&self, d: usize) -> Result<GroundStateSolution> {
        let h = self.settings.h;
        let n = node_count(&self.settings)?;
        let a = liouville_matrix(d, h, n);
        let half = (d as f64 - 1.0) / 2.0;
        let mut x: Vec<f64> = (0..n)
            .map(|j| {
                let r = (j as f64 + 0.5) * h;
                r.powf(half) * (-r).exp()
            })
            .collect();
        // The spectrum of L+ lies above -max V, so this shift is safely below it.
        let mut chol = a.shifted(-(potential(d, 0.0) + 1.0)).cholesky()?;
        let mut rq = f64::INFINITY;
        let mut refined = false;
        for it in 1..=self.max_iters {
            let y = chol.solve(&x);
            let norm = dot(&y, &y).sqrt();
            x = y.iter().map(|v| v / norm).collect();
            let ax = a.matvec(&x);
            let new_rq = dot(&x, &ax);
            let res: f64 = ax
                .iter()
                .zip(&x)
                .map(|(a, b)| (a - new_rq * b).powi(2))
                .sum::<f64>()
                .sqrt();
            let change = (new_rq - rq).abs();
            rq = new_rq;
            if !refined && change < 1e-6 {
                // move the shift next to the eigenvalue for fast convergence
                let candidate = rq - 1e-2;
                if let Ok(c) = a.shifted(candidate).cholesky() {
                    chol = c;
                    refined = true;
                }
            }
            if refined && change < self.tol && res < 1e-8 {
                if rq >= 0.0 {
                    return Err(Error::Eigen(format!(
                        "smallest eigenvalue {rq:.3e} is not negative; grid too coarse"
                    )));
                }
                let u: Vec<f64> = x
                    .iter()
                    .enumerate()
                    .map(|(j, w)| w / ((j as f64 + 0.5) * h).powf(half))
                    .collect();
                return Ok(GroundStateSolution {
                    method: self.name().into(),
                    k: (-rq).sqrt(),
                    profile: normalized_profile(d, h, u)?,
                    iterations: it,
                    residual: res,
                });
            }
        }
        Err(Error::Eigen(format!(
            "inverse iteration did not converge in {} iterations (rq = {rq})",
            self.max_iters
        )))
    }
}

/// Shooting on the radial ODE from the origin and from the far field,
/// matched through the Wronskian; bisection on `k`.
#[derive(Clone, Debug)]
pub struct Shooting {
    settings: SolverSettings,
    r_match: f64,
}

impl Shooting {
    pub fn new(settings: SolverSettings) -> Self {
        Self {
            settings,
            r_match: 2.0,
        }
    }

    fn rhs(d: usize, k2: f64, r: f64, y: [f64; 2]) -> [f64; 2] {
        [y[1], (k2 - potential(d, r)) * y[0] - (d as f64 - 1.0) / r * y[1]]
    }

    fn rk4(d: usize, k2: f64, r: f64, y: [f64; 2], h: f64) -> [f64; 2] {
        let f = |r: f64, y: [f64; 2]| Self::rhs(d, k2, r, y);
        let k1 = f(r, y);
        let k2v = f(r + h / 2.0, [y[0] + h / 2.0 * k1[0], y[1] + h / 2.0 * k1[1]]);
        let k3 = f(r + h / 2.0, [y[0] + h / 2.0 * k2v[0], y[1] + h / 2.0 * k2v[1]]);
        let k4 = f(r + h, [y[0] + h * k3[0], y[1] + h * k3[1]]);
        [
            y[0] + h / 6.0 * (k1[0] + 2.0 * k2v[0] + 2.0 * k3[0] + k4[0]),
            y[1] + h / 6.0 * (k1[1] + 2.0 * k2v[1] + 2.0 * k3[1] + k4[1]),
        ]
    }

    /// Regular solution on nodes `0..=m`, from the series at the origin.
    fn from_origin(&self, d: usize, k: f64, m: usize) -> Vec<[f64; 2]> {
        let h = self.settings.h;
        let df = d as f64;
        let k2 = k * k;
        let v0 = potential(d, 0.0);
        // V = p (1 + r^2/(d(d-2)))^{-2} = v0 - v2 r^2 + O(r^4)
        let v2 = 2.0 * exponent_p(d) / (df * (df - 2.0));
        // u = 1 + a r^2 + b r^4
        let a = (k2 - v0) / (2.0 * df);
        let b = ((k2 - v0) * a + v2) / (4.0 * (df + 2.0));
        let r0 = 0.5 * h;
        let mut y = [1.0 + a * r0 * r0 + b * r0.powi(4), 2.0 * a * r0 + 4.0 * b * r0.powi(3)];
        let mut out = Vec::with_capacity(m + 1);
        out.push(y);
        for j in 0..m {
            let r = (j as f64 + 0.5) * h;
            y = Self::rk4(d, k2, r, y, h);
            out.push(y);
        }
        out
    }

    /// Decaying solution on nodes `m..n`, integrated inward.
    fn from_far(&self, d: usize, k: f64, m: usize, n: usize) -> Vec<[f64; 2]> {
        let h = self.settings.h;
        let k2 = k * k;
        let half = (d as f64 - 1.0) / 2.0;
        let r_end = (n as f64 - 0.5) * h;
        let u = (-k * (r_end - self.r_match)).exp() * r_end.powf(-half);
        let mut y = [u, -(k + half / r_end) * u];
        let mut out = vec![[0.0; 2]; n - m];
        out[n - 1 - m] = y;
        for j in (m..n - 1).rev() {
            let r = (j as f64 + 1.5) * h;
            y = Self::rk4(d, k2, r, y, -h);
            out[j - m] = y;
        }
        out
    }

    fn mismatch(&self, d: usize, k: f64, m: usize, n: usize) -> f64 {
        let l = *self.from_origin(d, k, m).last().expect("nonempty");
        let r = self.from_far(d, k, m, n)[0];
        let wr = l[0] * r[1] - l[1] * r[0];
        wr / ((l[0].hypot(l[1])) * (r[0].hypot(r[1])))
    }
}

impl GroundStateSolver for Shooting {
    fn name(&self) -> &'static str {
        "shooting"
    }

    fn solve(&self, d: usize) -> Result<GroundStateSolution> {
        let h = self.settings.h;
        let n = node_count(&self.settings)?;
        let m = (self.r_match / h).round() as usize;
        let k_top = potential(d, 0.0).sqrt();
        // The ground state is the largest root; scan downward for a sign change.
        let samples = 200;
        let mut hi = k_top * (1.0 - 1e-6);
        let mut f_hi = self.mismatch(d, hi, m, n);
        let mut bracket = None;
        for i in 1..samples {
            let lo = k_top * (1.0 - i as f64 / samples as f64);
            let f_lo = self.mismatch(d, lo, m, n);
            if f_lo.signum() != f_hi.signum() {
                bracket = Some((lo, f_lo, hi));
                break;
            }
            hi = lo;
            f_hi = f_lo;
        }
        let Some((mut lo, mut f_lo, mut hi)) = bracket else {
            return Err(Error::Eigen("shooting found no bound state".into()));
        };
        let mut iters = 0;
        while hi - lo > 1e-13 * hi && iters < 200 {
            let mid = 0.5 * (lo + hi);
            let f_mid = self.mismatch(d, mid, m, n);
            if f_mid.signum() == f_lo.signum() {
                lo = mid;
                f_lo = f_mid;
            } else {
                hi = mid;
            }
            iters += 1;
        }
        let k = 0.5 * (lo + hi);
        let left = self.from_origin(d, k, m);
        let right = self.from_far(d, k, m, n);
        let scale = left[m][0] / right[0][0];
        let mut u: Vec<f64> = left[..m].iter().map(|y| y[0]).collect();
        u.extend(right.iter().map(|y| y[0] * scale));
        Ok(GroundStateSolution {
            method: self.name().into(),
            k,
            profile: normalized_profile(d, h, u)?,
            iterations: iters,
            residual: self.mismatch(d, k, m, n).abs(),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn both_solvers_agree_in_three_dimensions() {
        let reg = solver_registry();
        let s = SolverSettings::default();
        let a = reg.create("inverse-iteration", &s).unwrap().solve(3).unwrap();
        let b = reg.create("shooting", &s).unwrap().solve(3).unwrap();
        assert!((a.k / b.k - 1.0).abs() < 1e-6, "{} vs {}", a.k, b.k);
        assert!((a.k - 1.100_167_2).abs() < 1e-6, "{}", a.k);
        for r in [0.0, 0.5, 1.0, 3.0, 8.0] {
            let (x, y) = (a.profile.value(r), b.profile.value(r));
            assert!((x - y).abs() < 1e-6 * a.profile.value(0.0), "r={r}: {x} {y}");
        }
    }

    #[test]
    fn five_dimensional_ground_state_exists() {
        let reg = solver_registry();
        let s = SolverSettings::default();
        let a = reg.create("inverse-iteration", &s).unwrap().solve(5).unwrap();
        let b = reg.create("shooting", &s).unwrap().solve(5).unwrap();
        assert!(a.k > 0.0);
        assert!((a.k / b.k - 1.0).abs() < 1e-6, "{} vs {}", a.k, b.k);
    }

    #[test]
    fn unknown_solver_is_reported() {
        let reg = solver_registry();
        assert!(reg.create("lanczos", &SolverSettings::default()).is_err());
    }
}
