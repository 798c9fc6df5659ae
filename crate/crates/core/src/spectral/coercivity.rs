//! Sampled lower/upper bounds for
//! `[<L+ f|f> + <f|Lambda_0 rho>^2 + |<f|grad rho>|^2] / ||grad f||^2`
//! over radial `f` orthogonal to `rho`.

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::data::SpectralData;
use super::operator::LinearizedOperator;
use crate::field::domain::{grad_sq, inner};
use crate::field::functionals::smooth_step;
use crate::field::ground::w_prime;
use crate::field::symmetry::Symmetries;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProbeKind {
    GaussianBump,
    PolynomialDecay,
    /// Truncated `W'` with its `Lambda_0 rho` component removed.
    NearNull,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ProbeSample {
    pub kind: ProbeKind,
    pub ratio: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CoercivityReport {
    pub c_low: f64,
    pub c_high: f64,
    pub samples: Vec<ProbeSample>,
}

impl CoercivityReport {
    pub fn all_positive(&self) -> bool {
        self.samples.iter().all(|s| s.ratio > 0.0)
    }

    pub fn min_for(&self, kind: ProbeKind) -> Option<f64> {
        self.samples
            .iter()
            .filter(|s| s.kind == kind)
            .map(|s| s.ratio)
            .reduce(f64::min)
    }
}

/// Evaluates the coercivity ratio for one radial function.
pub fn coercivity_ratio(spec: &SpectralData, op: &LinearizedOperator, f: &[f64]) -> f64 {
    let g = &*spec.grid;
    let l0rho = g.lambda(spec.rho.values(), 0.0);
    let a = inner(g, f, &l0rho);
    (op.quadratic_form(f) + a * a) / grad_sq(g, f)
}

fn random_probe(spec: &SpectralData, rng: &mut impl Rng, i: usize) -> (ProbeKind, Vec<f64>) {
    let g = &*spec.grid;
    let d = spec.d;
    let kind = match i % 5 {
        0 | 1 => ProbeKind::GaussianBump,
        2 | 3 => ProbeKind::PolynomialDecay,
        _ => ProbeKind::NearNull,
    };
    let f = match kind {
        ProbeKind::GaussianBump => {
            let c = rng.gen_range(0.0..10.0);
            let w = rng.gen_range(0.3..5.0);
            g.sample(|r| (-((r - c) / w).powi(2)).exp())
        }
        ProbeKind::PolynomialDecay => {
            let a: [f64; 3] = [rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)];
            let s = rng.gen_range(0.5..5.0);
            g.sample(|r| {
                let x = r / s;
                (a[0] + a[1] * x * x + a[2] * x.powi(4)) * (-x * x).exp()
            })
        }
        ProbeKind::NearNull => {
            let cut = rng.gen_range(20.0..150.0);
            let mut f = g.sample(|r| w_prime(d, r) * smooth_step(r / cut, 1.0, 2.0));
            let l0rho = g.lambda(spec.rho.values(), 0.0);
            let c = inner(g, &f, &l0rho) / inner(g, &l0rho, &l0rho);
            f.iter_mut().zip(&l0rho).for_each(|(v, l)| *v -= c * l);
            f
        }
    };
    (kind, f)
}

/// Samples `n_samples` probes orthogonalized against `rho`.
pub fn coercivity_probe(spec: &SpectralData, n_samples: usize, rng: &mut impl Rng) -> CoercivityReport {
    let op = LinearizedOperator::new(spec.grid.clone());
    let g = &*spec.grid;
    let rho = spec.rho.values();
    let mut samples = Vec::with_capacity(n_samples);
    for i in 0..n_samples {
        let (kind, mut f) = random_probe(spec, rng, i);
        let c = inner(g, &f, rho);
        f.iter_mut().zip(rho).for_each(|(v, r)| *v -= c * r);
        samples.push(ProbeSample {
            kind,
            ratio: coercivity_ratio(spec, &op, &f),
        });
    }
    let c_low = samples.iter().map(|s| s.ratio).fold(f64::INFINITY, f64::min);
    let c_high = samples.iter().map(|s| s.ratio).fold(f64::NEG_INFINITY, f64::max);
    CoercivityReport {
        c_low,
        c_high,
        samples,
    }
}
