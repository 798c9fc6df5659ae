//! Machine-readable pass/fail report of the static checks: ground-state
//! identities, spectral consistency, coercivity, modulation round trips,
//! distances, the boost identity and determinism of the constants.

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::field::box3d::{Box3DGrid, BoxGridSpec};
use crate::field::domain::{grad_sq, inner, Domain};
use crate::field::functionals::{energy, functional_j, functional_k, momentum};
use crate::field::ground::{ground_energy, sample_w_family, w_value, BoostParams};
use crate::field::radial::RadialGridSpec;
use crate::field::state::Pair;
use crate::field::Spacing;
use crate::modulation::{
    assemble, distance_dw, fit_modulation, project_orthogonal, FrameParams, ModulationSettings, Thresholds,
};
use crate::spectral::coercivity::coercivity_probe;
use crate::spectral::{ConstantsFile, SpectralData};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub tolerance: f64,
    pub pass: bool,
    pub detail: String,
}

impl Check {
    /// Passes when `value <= tolerance`.
    pub fn at_most(name: &str, value: f64, tolerance: f64, detail: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            value,
            tolerance,
            pass: value <= tolerance,
            detail: detail.into(),
        }
    }

    /// Passes when `value > floor`.
    pub fn above(name: &str, value: f64, floor: f64, detail: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            value,
            tolerance: floor,
            pass: value > floor,
            detail: detail.into(),
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct StaticReport {
    pub seed: u64,
    pub checks: Vec<Check>,
}

impl StaticReport {
    pub fn all_pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn failures(&self) -> Vec<&Check> {
        self.checks.iter().filter(|c| !c.pass).collect()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct StaticOptions {
    /// Node count of the radial grid used by the ground-state checks.
    pub grid_n: Option<usize>,
    /// Use uniform instead of stretched spacing for those checks.
    pub grid_uniform: bool,
    pub seed: u64,
    pub coercivity_probes: usize,
    pub radial_round_trips: usize,
    pub box_round_trips: usize,
}

impl Default for StaticOptions {
    fn default() -> Self {
        Self {
            grid_n: None,
            grid_uniform: false,
            seed: 0,
            coercivity_probes: 100,
            radial_round_trips: 100,
            box_round_trips: 20,
        }
    }
}

/// Box and settings of the three-dimensional round trip: coarse enough that
/// a hundred fits stay within seconds on one core.
pub fn round_trip_box() -> Result<(Arc<Box3DGrid>, ModulationSettings)> {
    let grid = BoxGridSpec {
        half_width: 8.0,
        m: 32,
        spacing: Spacing::Uniform,
    }
    .build()?;
    let settings = ModulationSettings {
        golden_iters: 20,
        centre_sweeps: 1,
        ..ModulationSettings::default()
    };
    Ok((grid, settings))
}

/// Worst `(|d sigma|, |d c|, ||d v||_H)` over `n` random assemblies.
pub fn round_trip_errors<G: Domain + crate::field::ground::ResolutionFloor>(
    spec: &SpectralData,
    grid: &Arc<G>,
    settings: &ModulationSettings,
    n: usize,
    rng: &mut impl Rng,
) -> Result<[f64; 3]> {
    let dims = grid.translation_dims();
    let mut worst = [0.0f64; 3];
    for _ in 0..n {
        let params = FrameParams {
            sign: if rng.gen_bool(0.5) { 1.0 } else { -1.0 },
            sigma: rng.gen_range(-0.5..0.5),
            c: (0..dims).map(|_| rng.gen_range(-0.5..0.5)).collect(),
        };
        // Gaussian shell around a random point (radial grids) or a Gaussian
        // blob around a random centre (boxes).
        let mut gauss = || -> Vec<f64> {
            let amp = rng.gen_range(-1e-3..1e-3);
            let width = rng.gen_range(0.7..2.0);
            let (centre, shell): (Vec<f64>, f64) = if dims == 0 {
                (Vec::new(), rng.gen_range(0.0..3.0))
            } else {
                ((0..dims).map(|_| rng.gen_range(-1.0..1.0)).collect(), 0.0)
            };
            grid.radii(&centre)
                .iter()
                .map(|r| amp * (-((r - shell) / width).powi(2)).exp())
                .collect()
        };
        let raw = gauss();
        let v1 = project_orthogonal(spec, &**grid, &params, &raw)?;
        let v2 = gauss();
        let s = assemble(spec, grid, &params, &v1, &v2)?;
        let fit = fit_modulation(spec, &s, settings, None)?;
        let dc = fit
            .params
            .c
            .iter()
            .zip(&params.c)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        let d1: Vec<f64> = fit.v.u1.iter().zip(&v1).map(|(a, b)| a - b).collect();
        let d2: Vec<f64> = fit.v.u2.iter().zip(&v2).map(|(a, b)| a - b).collect();
        let dv = (grad_sq(&**grid, &d1) + inner(&**grid, &d2, &d2)).sqrt();
        let ds = if fit.params.sign == params.sign {
            (fit.params.sigma - params.sigma).abs()
        } else {
            f64::INFINITY
        };
        worst = [worst[0].max(ds), worst[1].max(dc), worst[2].max(dv)];
    }
    Ok(worst)
}

fn ground_state_checks(d: usize, opts: &StaticOptions) -> Result<Vec<Check>> {
    let mut gs = RadialGridSpec::default_for(d);
    if let Some(n) = opts.grid_n {
        gs.n = n;
    }
    if opts.grid_uniform {
        gs.spacing = Spacing::Uniform;
    }
    let g = gs.build()?;
    let w = g.sample(|r| w_value(d, r));
    let grad = grad_sq(&*g, &w);
    let k_rel = functional_k(&*g, &w).abs() / grad;
    let j = functional_j(&*g, &w);
    let j_rel = (j - grad / d as f64).abs() / j;
    let note = |ok: bool| {
        if ok {
            format!("n = {}, {:?}", gs.n, gs.spacing)
        } else {
            format!("not converged at n = {} ({:?}): refine the radial grid", gs.n, gs.spacing)
        }
    };
    Ok(vec![
        Check::at_most(&format!("ground_state_K_d{d}"), k_rel, 1e-6, note(k_rel <= 1e-6)),
        Check::at_most(&format!("ground_state_J_d{d}"), j_rel, 1e-8, note(j_rel <= 1e-8)),
    ])
}

fn spectral_checks(spec: &SpectralData) -> Vec<Check> {
    let d = &spec.diagnostics;
    vec![
        Check::at_most("eigen_residual", d.eigen_residual, 1e-6, "||L+ rho + k^2 rho||_2"),
        Check::at_most("k_cross_check", d.k_rel_diff, 1e-4, format!("{} vs {}", d.method, d.cross_check_method)),
        Check::above("a_W_positive", spec.a_w, 0.0, format!("a_W = {:.12}", spec.a_w)),
        Check::above("b_W_positive", spec.b_w, 0.0, format!("b_W = {:.12}", spec.b_w)),
        Check::at_most("b_W_formulas", d.b_w_rel_diff, 1e-3, format!("b_W alt = {:.12}", spec.b_w_alt)),
        Check::at_most("omega_g_plus_g_minus", (d.omega_plus_minus - 1.0).abs(), 1e-8, "omega(g+, g-) - 1"),
    ]
}

/// `|E^2 - |P|^2 - J(W)^2| / J(W)^2` of the boosted soliton.
pub fn boost_defect(p1: f64) -> Result<f64> {
    let grid = BoxGridSpec::far_field().build()?;
    let params = BoostParams {
        sigma: 0.0,
        p: vec![p1, 0.0, 0.0],
        q: vec![0.0; 3],
    };
    let s = sample_w_family(&grid, &params)?;
    let e = energy(&s);
    let p: f64 = momentum(&s).iter().map(|v| v * v).sum();
    let j = ground_energy(3);
    Ok((e * e - p - j * j).abs() / (j * j))
}

fn constants_close(a: &ConstantsFile, b: &ConstantsFile) -> f64 {
    [(a.k, b.k), (a.a_w, b.a_w), (a.b_w, b.b_w), (a.b_w_alt, b.b_w_alt)]
        .iter()
        .map(|(x, y)| (x / y - 1.0).abs())
        .fold(0.0, f64::max)
}

/// Runs every static check; `stored` constants, when given, are compared
/// with a fresh build.
pub fn run_static_suite(opts: &StaticOptions, stored: Option<&ConstantsFile>) -> Result<StaticReport> {
    let mut checks = Vec::new();
    checks.extend(ground_state_checks(3, opts)?);
    checks.extend(ground_state_checks(5, opts)?);

    let spec = SpectralData::build_default(3)?;
    checks.extend(spectral_checks(&spec));
    let spec5 = SpectralData::build_default(5)?;
    checks.push(Check::at_most(
        "b_W_formulas_d5",
        spec5.diagnostics.b_w_rel_diff,
        1e-3,
        format!("k = {:.12}", spec5.k),
    ));

    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let co = coercivity_probe(&spec, opts.coercivity_probes, &mut rng);
    checks.push(Check::above(
        "coercivity_min",
        co.c_low,
        0.0,
        format!("{} probes, ratio in [{:.4e}, {:.4e}]", co.samples.len(), co.c_low, co.c_high),
    ));

    let settings = ModulationSettings::default();
    let [ds, dc, dv] = round_trip_errors(&spec, &spec.grid, &settings, opts.radial_round_trips, &mut rng)?;
    checks.push(Check::at_most(
        "radial_round_trip",
        ds.max(dc).max(dv),
        1e-6,
        format!("{} assemblies: sigma {ds:.2e}, v {dv:.2e}", opts.radial_round_trips),
    ));
    let (bx, bx_settings) = round_trip_box()?;
    let [ds, dc, dv] = round_trip_errors(&spec, &bx, &bx_settings, opts.box_round_trips, &mut rng)?;
    checks.push(Check::at_most(
        "box_round_trip",
        ds.max(dc).max(dv),
        1e-6,
        format!("{} assemblies: sigma {ds:.2e}, c {dc:.2e}, v {dv:.2e}", opts.box_round_trips),
    ));

    let th = Thresholds::default();
    let mut worst: f64 = 0.0;
    for (sign, sigma) in [(1.0, 0.0), (-1.0, 0.5), (1.0, -0.5)] {
        let s = sample_w_family(&spec.grid, &BoostParams::scale(sigma, 3))?.scaled(sign);
        worst = worst.max(distance_dw(&spec, &s, &settings, &th)?.dw);
    }
    checks.push(Check::at_most("soliton_distance", worst, 1e-6, "max d_W over +-W_sigma"));

    let eps = 1e-3;
    let g = spec.grid.clone();
    let u1: Vec<f64> = g.nodes().iter().zip(spec.rho.values()).map(|(&r, v)| w_value(3, r) + eps * v).collect();
    let s = Pair::new(g.clone(), u1, vec![0.0; g.len()])?;
    let dw = distance_dw(&spec, &s, &settings, &th)?.dw;
    let ratio = dw * dw / (spec.k * spec.k * eps * eps);
    checks.push(Check::at_most(
        "rho_distance",
        (ratio / 0.5 - 1.0).abs(),
        0.02,
        format!("d_W^2 / (k eps)^2 = {ratio:.6} at eps = {eps}, expected 1/2"),
    ));

    for p1 in [0.1, 0.2, 0.4] {
        let defect = boost_defect(p1)?;
        checks.push(Check::at_most(&format!("boost_identity_p{p1}"), defect, 1e-3, "|E^2 - |P|^2 - J(W)^2| / J(W)^2"));
    }

    let again = SpectralData::build_default(3)?.constants();
    let fresh = spec.constants();
    checks.push(Check::at_most(
        "constants_idempotent",
        constants_close(&fresh, &again),
        1e-10,
        "two builds of the d = 3 constants",
    ));
    if let Some(stored) = stored {
        checks.push(Check::at_most(
            "constants_match_stored",
            constants_close(&fresh, stored),
            1e-10,
            "fresh build against the stored file",
        ));
    }
    Ok(StaticReport { seed: opts.seed, checks })
}
