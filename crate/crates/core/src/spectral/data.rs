use std::path::Path;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::operator::LinearizedOperator;
use super::profile::RadialProfile;
use super::solver::{solver_registry, SolverSettings};
use crate::error::{Error, Result};
use crate::field::domain::{inner, Field};
use crate::field::functionals::symplectic_omega;
use crate::field::ground::{exponent_p, w_dr, w_prime, w_value};
use crate::field::radial::{RadialField, RadialGrid, RadialGridSpec};
use crate::field::state::RadialState;

/// Agreement required between the two `b_W` formulas.
pub const B_W_TOLERANCE: f64 = 1e-3;
/// Agreement required between the two eigen solvers.
pub const K_TOLERANCE: f64 = 1e-4;

/// Measured residuals and cross-checks of a spectral build.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SpectralDiagnostics {
    pub method: String,
    pub cross_check_method: String,
    pub cross_check_k: f64,
    pub k_rel_diff: f64,
    /// `||L+ rho + k^2 rho||_2` with the field-grid operator.
    pub eigen_residual: f64,
    pub b_w_rel_diff: f64,
    /// `<W' | rho>`.
    pub wprime_rho: f64,
    /// `<rho | Lambda_0 rho>`.
    pub rho_lambda_rho: f64,
    /// `<d_j W | d_j rho>` per direction, expected to equal `a_W`.
    pub grad_pairing: f64,
    pub omega_plus_minus: f64,
    /// `||J L g+ - k g+||`.
    pub mode_residual: f64,
    /// Smallest tabulated value of `rho` inside the support check radius.
    pub rho_min: f64,
}

/// `rho`, `k`, `a_W`, `b_W` and the modes `g+-`.
#[derive(Clone, Debug)]
pub struct SpectralData {
    pub d: usize,
    pub k: f64,
    pub a_w: f64,
    pub b_w: f64,
    /// `k^{-2} p (p-1) <W^{p-2} W'^2 | rho>`.
    pub b_w_alt: f64,
    pub grid: Arc<RadialGrid>,
    pub rho: RadialField,
    pub rho_prime: RadialField,
    pub wprime: RadialField,
    pub profile: RadialProfile,
    pub g_plus: RadialState,
    pub g_minus: RadialState,
    pub settings: SolverSettings,
    pub diagnostics: SpectralDiagnostics,
}

/// Serialized constants; `k`, `a_W`, `b_W` plus the grids and residuals.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ConstantsFile {
    pub d: usize,
    pub k: f64,
    #[serde(rename = "a_W")]
    pub a_w: f64,
    #[serde(rename = "b_W")]
    pub b_w: f64,
    #[serde(rename = "b_W_alt")]
    pub b_w_alt: f64,
    pub grid: RadialGridSpec,
    pub eigen_grid: SolverSettings,
    pub residuals: SpectralDiagnostics,
}

impl ConstantsFile {
    pub fn read(path: &Path) -> Result<Self> {
        Ok(serde_json::from_str(&std::fs::read_to_string(path)?)?)
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        std::fs::write(path, serde_json::to_string_pretty(self)? + "\n")?;
        Ok(())
    }
}

/// Radius inside which `rho` must be strictly positive in the table.
const POSITIVITY_RADIUS: f64 = 30.0;

impl SpectralData {
    /// Default build: inverse iteration, cross-checked by shooting, on the
    /// default radial grid.
    pub fn build_default(d: usize) -> Result<Self> {
        Self::build(
            RadialGridSpec::default_for(d).build()?,
            SolverSettings::default(),
            "inverse-iteration",
            "shooting",
        )
    }

    pub fn build(
        grid: Arc<RadialGrid>,
        settings: SolverSettings,
        method: &str,
        cross_check: &str,
    ) -> Result<Self> {
        let d = grid.d();
        let reg = solver_registry();
        let sol = reg.create(method, &settings)?.solve(d)?;
        let check = reg.create(cross_check, &settings)?.solve(d)?;
        let k = sol.k;
        let k_rel_diff = (check.k / k - 1.0).abs();
        if k_rel_diff > K_TOLERANCE {
            return Err(Error::Consistency(format!(
                "{method} k = {k:.10} vs {cross_check} k = {:.10}",
                check.k
            )));
        }

        // Renormalize on the field grid so that ||rho||_2 = 1 there.
        let raw: Vec<f64> = grid.sample(|r| sol.profile.value(r));
        let norm = inner(&*grid, &raw, &raw).sqrt();
        let profile = sol.profile.scaled(1.0 / norm);
        let (rho_v, rho_p): (Vec<f64>, Vec<f64>) =
            grid.nodes().iter().map(|&r| profile.eval(r)).unzip();
        let wp = grid.sample(|r| w_prime(d, r));

        let p = exponent_p(d);
        let df = d as f64;
        let wpow = grid.sample(|r| w_value(d, r).powf(p));
        let a_w = inner(&*grid, &wpow, &rho_v) / df;
        let lambda0_rho: Vec<f64> = grid
            .nodes()
            .iter()
            .enumerate()
            .map(|(i, r)| r * rho_p[i] + df / 2.0 * rho_v[i])
            .collect();
        let b_w = inner(&*grid, &wp, &lambda0_rho);
        let weight = grid.sample(|r| {
            let w = w_value(d, r);
            let q = w_prime(d, r);
            w.powf(p - 2.0) * q * q
        });
        let b_w_alt = p * (p - 1.0) / (k * k) * inner(&*grid, &weight, &rho_v);
        let b_w_rel_diff = (b_w / b_w_alt - 1.0).abs();
        if !(a_w > 0.0 && b_w > 0.0 && b_w_alt > 0.0) {
            return Err(Error::Consistency(format!(
                "expected positive constants, got a_W = {a_w}, b_W = {b_w}, alt = {b_w_alt}"
            )));
        }
        if b_w_rel_diff > B_W_TOLERANCE {
            return Err(Error::Consistency(format!(
                "b_W formulas disagree: {b_w} vs {b_w_alt}"
            )));
        }

        let op = LinearizedOperator::new(grid.clone());
        let lrho = op.apply(&rho_v);
        let res: Vec<f64> = lrho.iter().zip(&rho_v).map(|(l, r)| l + k * k * r).collect();
        let eigen_residual = inner(&*grid, &res, &res).sqrt();

        let wr = grid.sample(|r| w_dr(d, r));
        let grad_pairing = inner(&*grid, &wr, &rho_p) / df;

        let c = 1.0 / (2.0 * k).sqrt();
        let g1: Vec<f64> = rho_v.iter().map(|v| c * v).collect();
        let g2: Vec<f64> = rho_v.iter().map(|v| c * k * v).collect();
        let g_plus = RadialState::new(grid.clone(), g1.clone(), g2.clone())?;
        let g_minus =
            RadialState::new(grid.clone(), g1.clone(), g2.iter().map(|v| -v).collect())?;
        let mode_res: Vec<f64> = res.iter().map(|v| c * v).collect();
        let mode_residual = inner(&*grid, &mode_res, &mode_res).sqrt();

        let rho_min = profile
            .table()
            .iter()
            .enumerate()
            .filter(|(j, _)| (*j as f64 + 0.5) * profile.spacing() <= POSITIVITY_RADIUS)
            .map(|(_, v)| *v)
            .fold(f64::INFINITY, f64::min);
        if rho_min <= 0.0 {
            return Err(Error::Eigen(format!("ground state changes sign ({rho_min:.3e})")));
        }

        let diagnostics = SpectralDiagnostics {
            method: sol.method.clone(),
            cross_check_method: check.method.clone(),
            cross_check_k: check.k,
            k_rel_diff,
            eigen_residual,
            b_w_rel_diff,
            wprime_rho: inner(&*grid, &wp, &rho_v),
            rho_lambda_rho: inner(&*grid, &rho_v, &lambda0_rho),
            grad_pairing,
            omega_plus_minus: symplectic_omega(&g_plus, &g_minus),
            mode_residual,
            rho_min,
        };
        Ok(Self {
            d,
            k,
            a_w,
            b_w,
            b_w_alt,
            rho: Field::new(grid.clone(), rho_v)?,
            rho_prime: Field::new(grid.clone(), rho_p)?,
            wprime: Field::new(grid.clone(), wp)?,
            grid,
            profile,
            g_plus,
            g_minus,
            settings,
            diagnostics,
        })
    }

    /// `(rho(r), rho'(r))` off the grid.
    #[inline]
    pub fn rho_at(&self, r: f64) -> (f64, f64) {
        self.profile.eval(r)
    }

    pub fn constants(&self) -> ConstantsFile {
        ConstantsFile {
            d: self.d,
            k: self.k,
            a_w: self.a_w,
            b_w: self.b_w,
            b_w_alt: self.b_w_alt,
            grid: self.grid.spec(),
            eigen_grid: self.settings,
            residuals: self.diagnostics.clone(),
        }
    }

    /// Compares against a stored constants file.
    pub fn verify_against(&self, stored: &ConstantsFile, rel_tol: f64) -> Result<()> {
        let pairs = [
            ("k", self.k, stored.k),
            ("a_W", self.a_w, stored.a_w),
            ("b_W", self.b_w, stored.b_w),
        ];
        for (name, now, then) in pairs {
            if (now / then - 1.0).abs() > rel_tol {
                return Err(Error::Consistency(format!(
                    "{name} = {now:.12} differs from stored {then:.12}"
                )));
            }
        }
        if stored.d != self.d {
            return Err(Error::Consistency(format!("stored d = {} vs {}", stored.d, self.d)));
        }
        Ok(())
    }
}
