use std::sync::{Arc, OnceLock};

use proptest::prelude::*;

use super::*;
use crate::field::domain::{grad_sq, inner, Domain};
use crate::field::functionals::{energy, functional_j};
use crate::field::ground::{sample_w_family, w_value, BoostParams};
use crate::field::radial::RadialGrid;
use crate::field::state::{Pair, RadialState};
use crate::field::BoxGridSpec;
use crate::spectral::SpectralData;

fn spec() -> &'static SpectralData {
    static SPEC: OnceLock<SpectralData> = OnceLock::new();
    SPEC.get_or_init(|| SpectralData::build_default(3).unwrap())
}

fn grid() -> Arc<RadialGrid> {
    spec().grid.clone()
}

fn radial_state(u1: Vec<f64>, u2: Vec<f64>) -> RadialState {
    Pair::new(grid(), u1, u2).unwrap()
}

fn w_plus(eps: f64, f: &[f64]) -> Vec<f64> {
    let g = grid();
    g.nodes().iter().zip(f).map(|(&r, v)| w_value(3, r) + eps * v).collect()
}

fn settings() -> ModulationSettings {
    ModulationSettings::default()
}

fn norm_h(g: &RadialGrid, a: &[f64], b: &[f64]) -> f64 {
    (grad_sq(g, a) + inner(g, b, b)).sqrt()
}

#[test]
fn exact_ground_state_fits_trivially() {
    let g = grid();
    let s = radial_state(w_plus(0.0, &vec![0.0; g.len()]), vec![0.0; g.len()]);
    let fit = fit_modulation(spec(), &s, &settings(), None).unwrap();
    assert_eq!(fit.sign(), 1.0);
    assert!(fit.sigma().abs() < 1e-10);
    assert!(fit.v.energy_norm() < 1e-9);
    let neg = s.scaled(-1.0);
    assert_eq!(fit_modulation(spec(), &neg, &settings(), None).unwrap().sign(), -1.0);
}

#[test]
fn rho_perturbation_is_already_orthogonal() {
    let rho = spec().rho.values();
    let g = grid();
    let s = radial_state(w_plus(0.01, rho), vec![0.0; g.len()]);
    let fit = fit_modulation(spec(), &s, &settings(), None).unwrap();
    assert!(fit.sigma().abs() < 1e-10);
    let diff: Vec<f64> = fit.v.u1.iter().zip(rho).map(|(v, r)| v - 0.01 * r).collect();
    assert!(grad_sq(&*g, &diff).sqrt() < 1e-10);
    let m = split_modes(spec(), &fit).unwrap();
    assert!((m.lambda1 - 0.01).abs() < 1e-10);
    assert!(m.lambda2.abs() < 1e-14);
    assert!(m.gamma_norm < 1e-9);
    let k = spec().k;
    let expect = 0.5 * k * k * 1e-4;
    assert!((linearized_norm_sq(&m) / expect - 1.0).abs() < 1e-8);
}

#[test]
fn unstable_mode_splits_onto_lambda_plus() {
    let gp = &spec().g_plus;
    let eps = 1e-3;
    let s = radial_state(w_plus(eps, &gp.u1), gp.u2.iter().map(|v| eps * v).collect());
    let fit = fit_modulation(spec(), &s, &settings(), None).unwrap();
    let m = split_modes(spec(), &fit).unwrap();
    assert!((m.lambda_plus - eps).abs() < 1e-12, "{}", m.lambda_plus);
    assert!(m.lambda_minus.abs() < 1e-12);
    assert!(m.gamma_norm < 1e-10);
    let k = spec().k;
    assert!(((m.lambda_plus + m.lambda_minus) / (2.0 * k).sqrt() - m.lambda1).abs() < 1e-15);
    assert!(((k / 2.0).sqrt() * (m.lambda_plus - m.lambda_minus) - m.lambda2).abs() < 1e-15);
}

#[test]
fn zero_split_has_zero_norm() {
    let g = grid();
    let s = radial_state(w_plus(0.0, &vec![0.0; g.len()]), vec![0.0; g.len()]);
    let fit = fit_modulation(spec(), &s, &settings(), None).unwrap();
    let m = split_modes(spec(), &fit).unwrap();
    assert!(linearized_norm_sq(&m) < 1e-20);
}

/// A smooth bump profile `a exp(-((r - c)/w)^2)`.
fn bump(g: &RadialGrid, a: f64, c: f64, w: f64) -> Vec<f64> {
    g.sample(|r| a * (-((r - c) / w).powi(2)).exp())
}

#[test]
fn superquadratic_part_is_cubic() {
    let g = grid();
    assert!(superquadratic_c(&*g, &vec![0.0; g.len()]).abs() < 1e-15);
    let rho = spec().rho.values();
    let ratio = |eps: f64| {
        let v: Vec<f64> = rho.iter().map(|r| eps * r).collect();
        superquadratic_c(&*g, &v) / eps.powi(3)
    };
    let (a, b, c) = (ratio(4e-3), ratio(2e-3), ratio(1e-3));
    // first-order Richardson: successive differences halve
    assert!(((a - b) / (b - c) - 2.0).abs() < 0.05, "{a} {b} {c}");
    assert!(c.abs() > 1e-3);
}

#[test]
fn energy_expansion_matches_superquadratic_remainder() {
    let g = grid();
    let id = FrameParams::identity(0);
    for eps in [1e-3, 3e-3] {
        let f1 = project_orthogonal(spec(), &*g, &id, &bump(&g, eps, 1.0, 1.5)).unwrap();
        let f1: Vec<f64> = f1.iter().zip(spec().rho.values()).map(|(v, r)| v + 0.5 * eps * r).collect();
        let f2 = bump(&g, 0.7 * eps, 2.0, 1.0);
        let s = radial_state(w_plus(1.0, &f1), f2);
        let fit = fit_modulation(spec(), &s, &settings(), None).unwrap();
        assert!(fit.sigma().abs() < 1e-9);
        let m = split_modes(spec(), &fit).unwrap();
        let wv = w_plus(0.0, &vec![0.0; g.len()]);
        let lhs = energy(&s) - functional_j(&*g, &wv) - (-m.k * m.lambda_plus * m.lambda_minus + 0.5 * m.gamma_form);
        let c = superquadratic_c(&*g, &fit.v.u1);
        assert!((lhs + c).abs() < 1e-8, "eps {eps}: {lhs} vs {}", -c);
        let ex = excess_energy(spec(), &fit).unwrap();
        assert!((ex - (energy(&s) - functional_j(&*g, &wv))).abs() < 1e-9);
    }
}

#[test]
fn distance_vanishes_on_the_soliton_family() {
    let g = grid();
    let th = Thresholds::default();
    for (sign, sigma) in [(1.0, 0.0), (-1.0, 0.4), (1.0, -0.7)] {
        let s = sample_w_family(&g, &BoostParams::scale(sigma, 3)).unwrap().scaled(sign);
        let r = distance_dw(spec(), &s, &settings(), &th).unwrap();
        assert!(r.dw < 1e-6, "{sign} {sigma}: {r:?}");
        assert_eq!(r.sign, sign);
        assert_eq!(r.regime, Regime::Inner);
    }
}

#[test]
fn distance_of_rho_perturbation_is_half_k_eps() {
    let th = Thresholds::default();
    let k = spec().k;
    for eps in [1e-3, 1e-4] {
        let g = grid();
        let s = radial_state(w_plus(eps, spec().rho.values()), vec![0.0; g.len()]);
        let r = distance_dw(spec(), &s, &settings(), &th).unwrap();
        let ratio = r.dw * r.dw / (0.5 * k * k * eps * eps);
        assert!((ratio - 1.0).abs() < 0.02, "eps {eps}: {ratio}");
    }
}

#[test]
fn distance_blends_between_inner_and_outer() {
    let th = Thresholds::default();
    let g = grid();
    let mut saw = std::collections::BTreeSet::new();
    for eps in [0.01, 0.1, 0.14, 0.2, 0.4] {
        let s = radial_state(w_plus(eps, spec().rho.values()), vec![0.0; g.len()]);
        let r = distance_dw(spec(), &s, &settings(), &th).unwrap();
        assert!(r.dw >= 0.0);
        match r.regime {
            Regime::Inner => assert_eq!(Some(r.dw), r.d1),
            Regime::Outer => assert_eq!(r.dw, r.d0),
            Regime::Blend => {
                let (a, b) = (r.d0.min(r.d1.unwrap()), r.d0.max(r.d1.unwrap()));
                assert!(r.dw >= a && r.dw <= b);
            }
        }
        saw.insert(format!("{:?}", r.regime));
    }
    assert_eq!(saw.len(), 3, "{saw:?}");
}

#[test]
fn sign_functional_on_reference_states() {
    let th = Thresholds::default();
    let g = grid();
    let w = w_plus(0.0, &vec![0.0; g.len()]);
    let scaled = |c: f64| radial_state(w.iter().map(|v| c * v).collect(), vec![0.0; g.len()]);
    let sf = |s: &RadialState| {
        let a = analyze(spec(), s, &settings(), &th, None, false).unwrap();
        sign_functional(&a, &th).unwrap()
    };
    assert_eq!(sf(&scaled(0.5)), 1);
    assert_eq!(sf(&scaled(1.5)), -1);
    assert_eq!(sf(&scaled(0.0)), 1);
    let near = radial_state(w_plus(1e-3, spec().rho.values()), vec![0.0; g.len()]);
    assert_eq!(sf(&near), -1);
    let near = radial_state(w_plus(-1e-3, spec().rho.values()), vec![0.0; g.len()]);
    assert_eq!(sf(&near), 1);
    // in the overlap of the two rules both must agree
    let mid = radial_state(w_plus(0.02, spec().rho.values()), vec![0.0; g.len()]);
    let a = analyze(spec(), &mid, &settings(), &th, None, false).unwrap();
    assert!(a.report.dw > th.delta_s() && a.report.dw < th.delta_e());
    assert_eq!(sign_functional(&a, &th).unwrap(), -1);
}

#[test]
fn region_predicates_on_reference_states() {
    let th = Thresholds::default();
    let g = grid();
    let w = w_plus(0.0, &vec![0.0; g.len()]);
    let flags = |c: f64| {
        let s = radial_state(w.iter().map(|v| c * v).collect(), vec![0.0; g.len()]);
        let a = analyze(spec(), &s, &settings(), &th, None, false).unwrap();
        (region_predicates(&a, &th), a)
    };
    let (f, _) = flags(1.0);
    assert!(f.in_h_star && !f.in_h_x);
    let (f, _) = flags(0.0);
    assert!(f.in_h_star && f.in_h_x && f.in_variational_zone);
    let (f, a) = flags(2.0);
    assert!(a.energy < 0.0 && f.in_h_star);
}

#[test]
fn zero_state_is_sign_ambiguous() {
    let g = grid();
    let s = RadialState::zeros(g);
    let err = fit_modulation(spec(), &s, &settings(), None).unwrap_err();
    assert!(matches!(err, crate::Error::SignAmbiguity { .. }), "{err}");
}

#[test]
fn translated_soliton_on_the_box() {
    let grid = BoxGridSpec::default().build().unwrap();
    let params = BoostParams {
        sigma: 0.1,
        p: vec![0.0; 3],
        q: vec![0.2, 0.0, 0.0],
    };
    let s = sample_w_family(&grid, &params).unwrap();
    let fit = fit_modulation(spec(), &s, &settings(), None).unwrap();
    assert!((fit.sigma() - 0.1).abs() < 1e-6);
    let c = fit.c();
    assert!((c[0] - 0.2).abs() < 1e-6 && c[1].abs() < 1e-6 && c[2].abs() < 1e-6);
    let m = split_modes(spec(), &fit).unwrap();
    assert!(m.mu.iter().all(|v| v.abs() < 1e-8) && m.alpha.abs() < 1e-8);
}

#[test]
fn frozen_thresholds_match_recalibration() {
    let cal = calibrate(spec(), &settings()).unwrap();
    let th = Thresholds::default();
    assert!((cal.thresholds.delta_a / th.delta_a - 1.0).abs() < 1e-6);
    assert!((cal.thresholds.c_d0 / th.c_d0 - 1.0).abs() < 1e-6);
    let t = cal.thresholds;
    assert!(t.eps_star() < t.delta_star() && t.delta_star() < t.delta_s());
    assert!(t.delta_s() < t.delta_h() && t.delta_h() < t.delta_e() && t.delta_e() < t.delta_a);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn radial_round_trip(
        sign in prop::sample::select(vec![-1.0, 1.0]),
        sigma in -1.0f64..1.0,
        a1 in -1e-3f64..1e-3,
        a2 in -1e-3f64..1e-3,
        centre in 0.0f64..4.0,
        width in 0.5f64..3.0,
    ) {
        let g = grid();
        let params = FrameParams { sign, sigma, c: Vec::new() };
        let raw = bump(&g, a1, centre, width);
        let v1 = project_orthogonal(spec(), &*g, &params, &raw).unwrap();
        let v2 = bump(&g, a2, centre + 1.0, width);
        let s = assemble(spec(), &g, &params, &v1, &v2).unwrap();
        let fit = fit_modulation(spec(), &s, &settings(), None).unwrap();
        prop_assert_eq!(fit.sign(), sign);
        prop_assert!((fit.sigma() - sigma).abs() < 1e-6);
        let d1: Vec<f64> = fit.v.u1.iter().zip(&v1).map(|(a, b)| a - b).collect();
        let d2: Vec<f64> = fit.v.u2.iter().zip(&v2).map(|(a, b)| a - b).collect();
        prop_assert!(norm_h(&g, &d1, &d2) < 1e-6);

        // reconstruction from the split
        let m = split_modes(spec(), &fit).unwrap();
        prop_assert!(m.alpha.abs() <= 1e-8 * fit.v.energy_norm() + 1e-13);
        let frame = frame::Frame::new(&*g, spec(), sigma, &[]).unwrap();
        let r1: Vec<f64> = frame.rho(-1.0).iter().zip(&m.gamma.u1).map(|(r, gm)| m.lambda1 * r + gm).collect();
        let r2: Vec<f64> = frame.rho(0.0).iter().zip(&m.gamma.u2).map(|(r, gm)| m.lambda2 * r + gm).collect();
        let e1: Vec<f64> = r1.iter().zip(&fit.v.u1).map(|(a, b)| a - b).collect();
        let e2: Vec<f64> = r2.iter().zip(&fit.v.u2).map(|(a, b)| a - b).collect();
        prop_assert!(norm_h(&g, &e1, &e2) < 1e-8);
        // gamma is symplectically orthogonal to both hyperbolic modes
        prop_assert!(inner(&*g, &m.gamma.u1, &frame.rho(1.0)).abs() < 1e-12);
        prop_assert!(inner(&*g, &m.gamma.u2, &frame.rho(0.0)).abs() < 1e-12);
    }
}
