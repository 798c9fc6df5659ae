//! The four-quadrant sweep over the sample data `W + eps a rho`.

use std::path::Path;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::ExperimentSpec;
use super::recipes::{normalized_bump, Bump, InitialData, Quadrant, QUADRANT_DIRECTIONS};
use super::run::{run_state, ExperimentOutcome, Lab};
use crate::dynamics::{linear_prediction_check, one_pass_check, Verdict};
use crate::error::Result;

/// `(backward, forward)` verdicts predicted for direction `a`.
pub fn expected_verdicts(a: [i8; 2]) -> (Verdict, Verdict) {
    use Verdict::*;
    match a {
        [1, 0] => (Blowup, Blowup),
        [-1, 0] => (Scatter, Scatter),
        [0, 1] => (Scatter, Blowup),
        _ => (Blowup, Scatter),
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuadrantRow {
    pub a1: i8,
    pub a2: i8,
    pub eps: f64,
    /// 0 for the sample datum, `i > 0` for the i-th perturbed variant.
    pub variant: usize,
    pub verdict_backward: Verdict,
    pub verdict_forward: Verdict,
    pub ejection_rate: Option<f64>,
    pub runtime: f64,
    pub expected_backward: Verdict,
    pub expected_forward: Verdict,
    /// Largest relative deviation from the linearized flow over both
    /// directions (NaN for perturbed variants).
    pub linear_deviation: f64,
    pub one_pass_violation: bool,
    /// `E - J(W)` of the datum.
    pub excess: f64,
    pub in_h_star: bool,
}

impl QuadrantRow {
    pub fn matches(&self) -> bool {
        self.verdict_backward == self.expected_backward && self.verdict_forward == self.expected_forward
    }

    pub fn undetermined(&self) -> bool {
        self.verdict_backward == Verdict::Undetermined || self.verdict_forward == Verdict::Undetermined
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct QuadrantTable {
    pub seed: u64,
    pub rows: Vec<QuadrantRow>,
}

impl QuadrantTable {
    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut w = csv::Writer::from_path(path)?;
        for row in &self.rows {
            w.serialize(row)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn undetermined(&self) -> usize {
        self.rows.iter().filter(|r| r.undetermined()).count()
    }

    pub fn mismatches(&self) -> usize {
        self.rows.iter().filter(|r| !r.matches()).count()
    }
}

/// One sweep entry: direction, amplitude and optional perturbation.
#[derive(Clone, Debug)]
struct Job {
    a: [i8; 2],
    eps: f64,
    variant: usize,
    perturbation: Option<Bump>,
}

fn jobs(exp: &ExperimentSpec) -> Vec<Job> {
    let mut out = Vec::new();
    for &eps in &exp.sweep.eps {
        for a in QUADRANT_DIRECTIONS {
            out.push(Job {
                a,
                eps,
                variant: 0,
                perturbation: None,
            });
        }
    }
    for i in 1..=exp.sweep.perturbed {
        let mut rng = ChaCha8Rng::seed_from_u64(exp.seed.wrapping_add(i as u64));
        let a = QUADRANT_DIRECTIONS[rng.gen_range(0..4)];
        let eps = exp.sweep.eps[rng.gen_range(0..exp.sweep.eps.len())];
        let sign = if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
        let bump = Bump {
            amplitude: sign,
            width: rng.gen_range(0.5..2.0),
            centre: rng.gen_range(0.0..4.0),
            velocity: rng.gen_range(-1.0..1.0),
        };
        out.push(Job {
            a,
            eps,
            variant: i,
            perturbation: Some(bump),
        });
    }
    out
}

fn run_job(lab: &Lab, exp: &ExperimentSpec, job: &Job, out: Option<&Path>) -> Result<QuadrantRow> {
    let started = Instant::now();
    let grid = exp.evolution.grid()?;
    let quadrant = Quadrant { a: job.a, eps: job.eps };
    quadrant.validate(exp.eps_max)?;
    let mut state = quadrant.build(&lab.spec, &grid)?;
    if let Some(b) = &job.perturbation {
        let p = normalized_bump(&grid, b, exp.sweep.perturb_fraction * job.eps)?;
        state = state.combine(1.0, &p, 1.0);
    }
    let mut run = exp.clone();
    run.name = format!("a{}{}_eps{:.0e}_v{}", job.a[0], job.a[1], job.eps, job.variant);
    let outcome: ExperimentOutcome = run_state(lab, &run, &state)?;
    if let Some(dir) = out {
        outcome.write(dir)?;
    }
    let rec = &outcome.record;
    let (a1, a2) = (job.a[0] as f64, job.a[1] as f64);
    let linear_deviation = if job.perturbation.is_none() {
        let dw_max = lab.thresholds.delta_h();
        let f = linear_prediction_check(&rec.forward, lab.spec.k, job.eps, (a1, a2), dw_max);
        let b = linear_prediction_check(&rec.backward, lab.spec.k, job.eps, (a1, -a2), dw_max);
        f.max_relative.max(b.max_relative)
    } else {
        f64::NAN
    };
    let delta = lab.thresholds.delta_star();
    let (expected_backward, expected_forward) = expected_verdicts(job.a);
    Ok(QuadrantRow {
        a1: job.a[0],
        a2: job.a[1],
        eps: job.eps,
        variant: job.variant,
        verdict_backward: rec.verdict_backward,
        verdict_forward: rec.verdict_forward,
        ejection_rate: rec.ejection_rate_fit,
        runtime: started.elapsed().as_secs_f64(),
        expected_backward,
        expected_forward,
        linear_deviation,
        one_pass_violation: one_pass_check(&rec.forward, delta).violation || one_pass_check(&rec.backward, delta).violation,
        excess: outcome.initial.excess,
        in_h_star: outcome.initial.regions.in_h_star,
    })
}

/// Runs the four directions for every `eps` of the sweep, plus the perturbed
/// variants, in parallel; rows come back in job order.
pub fn run_quadrant_sweep(lab: &Lab, exp: &ExperimentSpec) -> Result<QuadrantTable> {
    exp.validate()?;
    let out = exp.out.as_deref();
    let rows = jobs(exp)
        .par_iter()
        .map(|job| run_job(lab, exp, job, out))
        .collect::<Result<Vec<_>>>()?;
    let table = QuadrantTable { seed: exp.seed, rows };
    if let Some(dir) = out {
        std::fs::create_dir_all(dir)?;
        table.write_csv(&dir.join("quadrant.csv"))?;
    }
    Ok(table)
}
