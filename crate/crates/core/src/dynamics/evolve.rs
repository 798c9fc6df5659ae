//! The monitored evolution loop and the blow-up / scattering detectors.

use std::time::Instant;

use super::config::EvolutionConfig;
use super::record::{BlowupEvidence, DirectionRecord, MonitorExtra, MonitorRow, TrajectoryRecord, Verdict};
use super::scheme::{integrator_registry, Integrator, WaveGrid, WaveState};
use crate::error::Result;
use crate::field::domain::{inner, power_integral, Domain};
use crate::field::functionals::{exterior_norm_sq, Cutoff};
use crate::field::state::RadialState;
use crate::modulation::{analyze, sign_functional, FrameParams, ModulationSettings, Thresholds};
use crate::spectral::SpectralData;

/// `tau` is marked unavailable
/// after this many consecutive monitors without `sigma`.
const TAU_GAP: usize = 5;
/// Step below which the integration is considered stalled.
const DT_FLOOR: f64 = 1e-10;

/// Shared read-only context of an evolution.
pub struct Evolver<'a> {
    pub spec: &'a SpectralData,
    pub cfg: &'a EvolutionConfig,
    pub settings: &'a ModulationSettings,
    pub thresholds: &'a Thresholds,
    grid: WaveGrid,
    integrator: Box<dyn Integrator>,
}

/// `tau` accumulated by the trapezoid rule on `e^sigma`.
#[derive(Clone, Debug)]
struct TauClock {
    tau: f64,
    last: Option<(f64, f64)>,
    gap: usize,
}

impl TauClock {
    fn new() -> Self {
        Self {
            tau: 0.0,
            last: None,
            gap: 0,
        }
    }

    fn advance(&mut self, t: f64, sigma: Option<f64>) -> f64 {
        match (self.last, sigma) {
            (None, Some(s)) => {
                // tau starts at the first fitted sample.
                self.last = Some((t, s));
            }
            (Some((t0, s0)), Some(s)) => {
                if self.tau.is_finite() {
                    self.tau += 0.5 * (t - t0) * (s0.exp() + s.exp());
                }
                self.last = Some((t, s));
                self.gap = 0;
            }
            (Some((t0, s0)), None) => {
                self.gap += 1;
                if self.gap >= TAU_GAP {
                    self.tau = f64::NAN;
                } else if self.tau.is_finite() {
                    self.tau += (t - t0) * s0.exp();
                }
                self.last = Some((t, s0));
            }
            (None, None) => return f64::NAN,
        }
        self.tau
    }
}

/// Monitor values of one state plus the frame to seed the next fit with.
struct Sample {
    row: MonitorRow,
    extra: MonitorExtra,
    frame: Option<FrameParams>,
}

/// `true` when the norm or amplitude indicates blow-up.
pub fn detect_blowup(cfg: &EvolutionConfig, norm: f64, sup_u: f64) -> bool {
    !(norm <= cfg.blowup_norm_threshold && sup_u <= cfg.blowup_sup_threshold)
}

/// Scattering proxy on the trailing window ending at the last row: `K > 0`,
/// `d_W >= delta_*` and bounded norm throughout, and free-wave dominance
/// (small and non-increasing potential ratio) at the end.
pub fn detect_scattering(
    rows: &[MonitorRow],
    extra: &[MonitorExtra],
    cfg: &EvolutionConfig,
    thresholds: &Thresholds,
    norm0: f64,
) -> bool {
    let Some(last) = rows.last() else {
        return false;
    };
    if last.t < cfg.scatter_window {
        return false;
    }
    let start = rows.partition_point(|r| r.t < last.t - cfg.scatter_window);
    let (w_rows, w_extra) = (&rows[start..], &extra[start..]);
    if w_rows.len() < 2 {
        return false;
    }
    let bound = cfg.scatter_norm_factor * norm0.max(1e-300);
    let steady = w_rows
        .iter()
        .zip(w_extra)
        .all(|(r, e)| r.k_value > 0.0 && r.dw >= thresholds.delta_star() && e.norm <= bound);
    let first_ratio = w_extra[0].potential_ratio;
    let last_ratio = w_extra[w_extra.len() - 1].potential_ratio;
    steady && last_ratio < cfg.scatter_ratio && last_ratio <= first_ratio
}

impl<'a> Evolver<'a> {
    pub fn new(
        spec: &'a SpectralData,
        cfg: &'a EvolutionConfig,
        settings: &'a ModulationSettings,
        thresholds: &'a Thresholds,
    ) -> Result<Self> {
        cfg.validate()?;
        Ok(Self {
            spec,
            cfg,
            settings,
            thresholds,
            grid: cfg.grid()?,
            integrator: integrator_registry().create(&cfg.integrator, &())?,
        })
    }

    pub fn grid(&self) -> &WaveGrid {
        &self.grid
    }

    /// Samples `(u1, u2)` given as functions of `r` on the evolution grid.
    pub fn sample(&self, u1: impl Fn(f64) -> f64, u2: impl Fn(f64) -> f64) -> Result<RadialState> {
        let g = self.grid.radial();
        RadialState::new(g.clone(), g.sample(u1), g.sample(u2))
    }

    fn monitor(&self, s: &WaveState, seed: Option<&FrameParams>, clock: &mut TauClock) -> Result<Sample> {
        let pair = s.to_pair(&self.grid)?;
        let g = &*pair.grid;
        let t = s.t;
        let norm = pair.energy_norm();
        let kinetic = inner(g, &pair.u2, &pair.u2);
        let cone = t + self.cfg.cone_offset;
        let cutoff = Cutoff { radius: cone };
        let r = g.nodes();
        let du = g.derivative(&pair.u1);
        let wts = g.weights();
        let (mut virial, mut equip) = (0.0, 0.0);
        for i in 0..g.len() {
            let c = wts[i] * cutoff.at(r[i]) * pair.u2[i];
            virial += c * (r[i] * du[i] + 1.5 * pair.u1[i]);
            equip += c * pair.u1[i];
        }
        let potential_ratio = power_integral(g, &pair.u1, 6.0) / (norm * norm).max(1e-300);

        let mut extra = MonitorExtra {
            norm,
            sup_u: s.sup_u(&self.grid),
            kinetic,
            potential_ratio,
            lambda2: f64::NAN,
            gamma_norm: f64::NAN,
            sign: None,
            analysis_error: None,
        };
        let mut row = MonitorRow {
            t,
            tau: f64::NAN,
            energy: f64::NAN,
            k_value: f64::NAN,
            dw: f64::NAN,
            lambda1: f64::NAN,
            sigma: f64::NAN,
            e_ext: exterior_norm_sq(&pair, cone),
            virial,
            equip,
        };
        let mut frame = None;
        let mut sigma = None;
        match analyze(self.spec, &pair, self.settings, self.thresholds, seed, false) {
            Ok(a) => {
                row.energy = a.energy;
                row.k_value = a.k_value;
                row.dw = a.report.dw;
                extra.sign = sign_functional(&a, self.thresholds).ok();
                if let (Some(fit), Some(split)) = (&a.fit, &a.split) {
                    frame = Some(fit.params.clone());
                    if a.report.dw <= self.thresholds.delta_e() {
                        row.lambda1 = split.lambda1;
                        row.sigma = fit.params.sigma;
                        extra.lambda2 = split.lambda2;
                        extra.gamma_norm = split.gamma_norm;
                        sigma = Some(fit.params.sigma);
                    }
                }
            }
            Err(e) => {
                row.energy = crate::field::functionals::energy(&pair);
                row.k_value = crate::field::functionals::functional_k(g, &pair.u1);
                extra.analysis_error = Some(e.to_string());
            }
        }
        row.tau = clock.advance(t, sigma);
        Ok(Sample { row, extra, frame })
    }

    /// Step size: nominal, shrunk by the norm growth and the stiffness of the
    /// nonlinearity.
    fn step_size(&self, dt0: f64, norm0: f64, norm: f64, sup_u: f64) -> f64 {
        let by_norm = dt0 * (norm0 / norm).min(1.0);
        let by_stiffness = 0.5 / (5f64.sqrt() * sup_u * sup_u).max(1e-300);
        dt0.min(by_norm).min(by_stiffness)
    }

    /// Integrates until `t_end` or a threshold crossing; returns the crossing
    /// time if one happened.
    fn run_until_crossing(&self, grid: &WaveGrid, s: &mut WaveState, dt0: f64, norm0: f64, t_end: f64) -> Option<f64> {
        let mut scratch = Vec::new();
        while s.t < t_end {
            let norm = s.quick_norm_sq(grid).sqrt();
            let sup = s.sup_u(grid);
            if !s.is_finite() || detect_blowup(self.cfg, norm, sup) {
                return Some(s.t);
            }
            let dt = self.step_size(dt0, norm0, norm, sup).min(t_end - s.t);
            if dt < DT_FLOOR {
                return Some(s.t);
            }
            self.integrator.step(grid, s, dt, &mut scratch);
        }
        None
    }

    /// Re-runs from `checkpoint` at doubled resolution and halved step.
    fn confirm(&self, checkpoint: &WaveState, norm0: f64, t_detect: f64) -> Result<Option<f64>> {
        let fine = self.grid.refined()?;
        let mut s = checkpoint.resample(&self.grid, &fine)?;
        let t_end = t_detect + (t_detect - checkpoint.t).max(1.0);
        Ok(self.run_until_crossing(&fine, &mut s, 0.5 * self.cfg.dt(), norm0, t_end))
    }

    /// Evolves `state0` forward with monitors until a verdict or the horizon.
    pub fn evolve_direction(&self, state0: &RadialState) -> Result<DirectionRecord> {
        let started = Instant::now();
        let grid = &self.grid;
        let mut s = WaveState::from_pair(grid, state0)?;
        let dt0 = self.cfg.dt();
        let interval = self.cfg.monitor_interval();
        let norm0 = s.quick_norm_sq(grid).sqrt().max(1e-12);
        let mut rec = DirectionRecord::default();
        let mut clock = TauClock::new();
        let mut seed: Option<FrameParams> = None;
        let mut checkpoint = s.clone();
        let mut scratch = Vec::new();
        let mut next_monitor = 0usize;

        loop {
            let t_monitor = next_monitor as f64 * interval;
            if s.t >= t_monitor - 1e-12 * interval {
                let sample = self.monitor(&s, seed.as_ref(), &mut clock)?;
                seed = sample.frame.clone();
                let (norm, sup) = (sample.extra.norm, sample.extra.sup_u);
                if norm < 0.5 * self.cfg.blowup_norm_threshold && sup < 0.5 * self.cfg.blowup_sup_threshold {
                    checkpoint = s.clone();
                }
                rec.rows.push(sample.row);
                rec.extra.push(sample.extra);
                next_monitor += 1;
                if rec.verdict.is_none() && detect_scattering(&rec.rows, &rec.extra, self.cfg, self.thresholds, norm0) {
                    rec.verdict = Some(Verdict::Scatter);
                    rec.reason = format!("free-wave dominance over the window ending at t = {:.3}", s.t);
                    if self.cfg.stop_on_verdict {
                        break;
                    }
                }
                if s.t >= self.cfg.t_max - 1e-12 {
                    break;
                }
            }

            let norm = s.quick_norm_sq(grid).sqrt();
            let sup = s.sup_u(grid);
            let crossed = !s.is_finite() || detect_blowup(self.cfg, norm, sup);
            let dt = self.step_size(dt0, norm0, norm, sup);
            if crossed || dt < DT_FLOOR {
                let t_confirm = if self.cfg.confirm_blowup {
                    self.confirm(&checkpoint, norm0, s.t)?
                } else {
                    Some(s.t)
                };
                let confirmed = t_confirm.is_some();
                rec.blowup = Some(BlowupEvidence {
                    t_detect: s.t,
                    norm,
                    sup_u: sup,
                    t_checkpoint: checkpoint.t,
                    t_confirm,
                    confirmed,
                });
                if rec.verdict.is_none() {
                    if confirmed {
                        rec.verdict = Some(Verdict::Blowup);
                        rec.reason = format!("norm {norm:.3e}, max|u| {sup:.3e} at t = {:.4}, confirmed on the refined grid", s.t);
                    } else {
                        rec.verdict = Some(Verdict::Undetermined);
                        rec.reason = format!("threshold crossed at t = {:.4} but not confirmed on the refined grid", s.t);
                    }
                }
                break;
            }
            let t_next = (next_monitor as f64 * interval).min(self.cfg.t_max);
            let dt = dt.min(t_next - s.t).max(DT_FLOOR);
            self.integrator.step(grid, &mut s, dt, &mut scratch);
            rec.steps += 1;
        }
        if rec.verdict.is_none() {
            rec.verdict = Some(Verdict::Undetermined);
            rec.reason = format!("horizon t = {} reached without a verdict", self.cfg.t_max);
        }
        rec.runtime_s = started.elapsed().as_secs_f64();
        Ok(rec)
    }

    /// Forward run of `state0` and of its time reversal.
    pub fn evolve_with_monitors(&self, state0: &RadialState) -> Result<TrajectoryRecord> {
        let reversed = state0.time_reversed();
        let (fwd, bwd) = rayon::join(|| self.evolve_direction(state0), || self.evolve_direction(&reversed));
        Ok(TrajectoryRecord::new(fwd?, bwd?))
    }
}

/// Convenience wrapper building an `Evolver` for a single trajectory.
pub fn evolve_with_monitors(
    spec: &SpectralData,
    state0: &RadialState,
    cfg: &EvolutionConfig,
    settings: &ModulationSettings,
    thresholds: &Thresholds,
) -> Result<TrajectoryRecord> {
    Evolver::new(spec, cfg, settings, thresholds)?.evolve_with_monitors(state0)
}
