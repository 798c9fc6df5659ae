//! Whole-trajectory behaviour on the default evolution grid.

use critwave::dynamics::{
    evolve_with_monitors, identity_residuals, EvolutionConfig, Evolver, Verdict,
};
use critwave::field::ground::w_value;
use critwave::modulation::{ModulationSettings, Thresholds};
use critwave::spectral::SpectralData;

fn spec() -> SpectralData {
    SpectralData::build_default(3).unwrap()
}

fn config(t_max: f64) -> EvolutionConfig {
    EvolutionConfig {
        t_max,
        ..EvolutionConfig::default()
    }
}

#[test]
fn twice_the_ground_state_blows_up_in_both_directions() {
    let spec = spec();
    let (cfg, st, th) = (config(5.0), ModulationSettings::default(), Thresholds::default());
    let ev = Evolver::new(&spec, &cfg, &st, &th).unwrap();
    let s0 = ev.sample(|r| 2.0 * w_value(3, r), |_| 0.0).unwrap();
    let rec = evolve_with_monitors(&spec, &s0, &cfg, &st, &th).unwrap();
    assert!(rec.forward.rows[0].energy < 0.0);
    for dir in [&rec.forward, &rec.backward] {
        assert_eq!(dir.verdict(), Verdict::Blowup, "{}", dir.reason);
        let ev = dir.blowup.as_ref().unwrap();
        assert!(ev.confirmed && ev.t_detect < 5.0);
    }
}

#[test]
fn ground_state_stays_put_over_a_short_horizon() {
    let spec = spec();
    let (cfg, st, th) = (config(5.0), ModulationSettings::default(), Thresholds::default());
    let ev = Evolver::new(&spec, &cfg, &st, &th).unwrap();
    let rec = ev.evolve_direction(&ev.sample(|r| w_value(3, r), |_| 0.0).unwrap()).unwrap();
    assert_eq!(rec.verdict(), Verdict::Undetermined);
    let worst = rec.rows.iter().map(|r| r.dw).fold(0.0, f64::max);
    assert!(worst < 1e-4, "d_W reached {worst:.3e}");
    let last = rec.rows.last().unwrap();
    assert!(last.sigma.abs() < 1e-4 && (last.t - 5.0).abs() < 1e-9);
}

#[test]
fn stable_mode_decays() {
    let spec = spec();
    let (cfg, st, th) = (config(2.0), ModulationSettings::default(), Thresholds::default());
    let ev = Evolver::new(&spec, &cfg, &st, &th).unwrap();
    let (eps, k) = (1e-3, spec.k);
    let s0 = ev
        .sample(|r| w_value(3, r) + eps * spec.rho_at(r).0, |r| -k * eps * spec.rho_at(r).0)
        .unwrap();
    let rec = ev.evolve_direction(&s0).unwrap();
    let (first, last) = (&rec.rows[0], rec.rows.last().unwrap());
    assert!(last.lambda1.abs() < 0.3 * first.lambda1.abs(), "{} -> {}", first.lambda1, last.lambda1);
}

#[test]
fn half_ground_state_scatters_with_small_identity_residuals() {
    let spec = spec();
    let (cfg, st, th) = (config(40.0), ModulationSettings::default(), Thresholds::default());
    let ev = Evolver::new(&spec, &cfg, &st, &th).unwrap();
    let rec = ev.evolve_direction(&ev.sample(|r| 0.5 * w_value(3, r), |_| 0.0).unwrap()).unwrap();
    assert_eq!(rec.verdict(), Verdict::Scatter, "{}", rec.reason);
    assert!(rec.rows.iter().all(|r| r.k_value > 0.0));
    let id = identity_residuals(&rec, 20.0);
    assert!(id.samples > 10);
    assert!(id.virial < 1e-2 && id.equipartition < 1e-2, "{id:?}");
}
