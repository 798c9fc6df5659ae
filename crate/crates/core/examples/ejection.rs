//! Evolves `(W + eps rho, 0)` forward and fits the ejection rate of the
//! unstable mode coefficient against the spectral `k`.
//!
//! cargo run --release --example ejection -- 1e-3

use anyhow::Result;
use critwave::dynamics::{fit_ejection_rate, EjectionWindow, EvolutionConfig, Evolver};
use critwave::field::ground::w_value;
use critwave::modulation::{ModulationSettings, Thresholds};
use critwave::spectral::SpectralData;

fn main() -> Result<()> {
    let eps: f64 = std::env::args().nth(1).map(|s| s.parse()).transpose()?.unwrap_or(1e-3);
    let spec = SpectralData::build_default(3)?;
    let (cfg, settings, thresholds) = (EvolutionConfig::default(), ModulationSettings::default(), Thresholds::default());
    let evolver = Evolver::new(&spec, &cfg, &settings, &thresholds)?;
    let state0 = evolver.sample(|r| w_value(3, r) + eps * spec.rho_at(r).0, |_| 0.0)?;
    let rec = evolver.evolve_direction(&state0)?;
    println!("verdict {} after {} steps ({:.1} s): {}", rec.verdict(), rec.steps, rec.runtime_s, rec.reason);
    for row in rec.rows.iter().step_by(10) {
        println!("t {:6.2}  tau {:8.4}  dW {:9.3e}  lambda1 {:10.3e}  sigma {:8.4}", row.t, row.tau, row.dw, row.lambda1, row.sigma);
    }
    let window = EjectionWindow::standard(rec.rows[0].dw, &thresholds);
    let fit = fit_ejection_rate(&rec, &window)?;
    println!("rate {:.5} over {} samples, k = {:.5}, ratio {:.4}", fit.rate, fit.samples, spec.k, fit.rate / spec.k);
    Ok(())
}
