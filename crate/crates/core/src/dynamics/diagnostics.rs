//! Checks run on recorded trajectories: the ejection rate, the reduced
//! modulation equation, the virial and equipartition identities, the
//! linearized early-time prediction and the one-pass property.

use serde::{Deserialize, Serialize};

use super::record::{DirectionRecord, MonitorExtra, MonitorRow};
use crate::error::{Error, Result};
use crate::modulation::Thresholds;

/// Fewest samples accepted in a fitting window.
pub const MIN_WINDOW: usize = 4;

/// `d_W` range over which the ejection rate is fitted.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EjectionWindow {
    pub dw_min: f64,
    pub dw_max: f64,
}

impl EjectionWindow {
    /// From a multiple of the initial distance (so that the `cosh` start of
    /// `lambda_1` has settled into exponential growth) up to `delta_H`.
    pub fn standard(dw0: f64, thresholds: &Thresholds) -> Self {
        Self {
            dw_min: 5.0 * dw0,
            dw_max: thresholds.delta_h(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EjectionFit {
    /// Least-squares slope of `log |lambda_1|` against `tau`.
    pub rate: f64,
    pub intercept: f64,
    pub samples: usize,
    pub t_start: f64,
    pub t_end: f64,
    /// `d_W` non-decreasing on the window.
    pub monotone: bool,
    /// `max |sigma(t) - sigma(t0)| / d_W(t)` on the window.
    pub sigma_drift_ratio: f64,
    /// `lambda_1` keeps one sign on the window.
    pub sign: i8,
}

/// Least-squares line `y = a + b x`; returns `(a, b)`.
pub fn least_squares(x: &[f64], y: &[f64]) -> (f64, f64) {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    let b = sxy / sxx;
    (my - b * mx, b)
}

/// First contiguous run of rows with a fit and `d_W` inside the window.
fn window_rows<'a>(rows: &'a [MonitorRow], w: &EjectionWindow) -> &'a [MonitorRow] {
    let ok = |r: &MonitorRow| {
        r.tau.is_finite() && r.lambda1.is_finite() && r.lambda1 != 0.0 && r.dw >= w.dw_min && r.dw <= w.dw_max
    };
    let start = rows.iter().position(ok).unwrap_or(rows.len());
    let len = rows[start..].iter().take_while(|r| ok(r)).count();
    &rows[start..start + len]
}

/// Exponential rate of `|lambda_1|` in `tau` on the window.
pub fn fit_ejection_rate(rec: &DirectionRecord, window: &EjectionWindow) -> Result<EjectionFit> {
    let rows = window_rows(&rec.rows, window);
    if rows.len() < MIN_WINDOW {
        return Err(Error::WindowTooShort(rows.len()));
    }
    let tau: Vec<f64> = rows.iter().map(|r| r.tau).collect();
    let log_l: Vec<f64> = rows.iter().map(|r| r.lambda1.abs().ln()).collect();
    let (intercept, rate) = least_squares(&tau, &log_l);
    let monotone = rows.windows(2).all(|p| p[1].dw >= p[0].dw);
    let sigma0 = rows[0].sigma;
    let sigma_drift_ratio = rows
        .iter()
        .map(|r| (r.sigma - sigma0).abs() / r.dw)
        .fold(0.0, f64::max);
    let positive = rows.iter().all(|r| r.lambda1 > 0.0);
    let negative = rows.iter().all(|r| r.lambda1 < 0.0);
    Ok(EjectionFit {
        rate,
        intercept,
        samples: rows.len(),
        t_start: rows[0].t,
        t_end: rows[rows.len() - 1].t,
        monotone,
        sigma_drift_ratio,
        sign: if positive { 1 } else if negative { -1 } else { 0 },
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OdeResidual {
    /// `|d_tau lambda_1 - lambda_2 - sigma_tau lambda_1| / |lambda_2|` per
    /// interior sample (NaN where undefined).
    pub residual: Vec<f64>,
    pub times: Vec<f64>,
    /// Largest residual over samples with `|lambda_2|` above
    /// `floor * max |lambda_2|`.
    pub max_relative: f64,
    /// `max |sigma_tau| / ||gamma||_H` on the segment.
    pub sigma_tau_over_gamma: f64,
    pub samples: usize,
}

/// Compares the finite-difference `d_tau lambda_1` with `lambda_2 + sigma_tau
/// lambda_1` on consecutive fitted samples with `d_W <= dw_max`.
pub fn modulation_ode_residual(rec: &DirectionRecord, dw_max: f64, floor: f64) -> OdeResidual {
    let fitted = |r: &MonitorRow, e: &MonitorExtra| {
        r.tau.is_finite() && r.lambda1.is_finite() && r.sigma.is_finite() && e.lambda2.is_finite() && r.dw <= dw_max
    };
    let n = rec.rows.len();
    let mut residual = vec![f64::NAN; n];
    let mut sigma_tau = vec![f64::NAN; n];
    for i in 1..n.saturating_sub(1) {
        let (a, b, c) = (&rec.rows[i - 1], &rec.rows[i], &rec.rows[i + 1]);
        if !(fitted(a, &rec.extra[i - 1]) && fitted(b, &rec.extra[i]) && fitted(c, &rec.extra[i + 1])) {
            continue;
        }
        let dtau = c.tau - a.tau;
        if dtau <= 0.0 {
            continue;
        }
        let dl = (c.lambda1 - a.lambda1) / dtau;
        let ds = (c.sigma - a.sigma) / dtau;
        let l2 = rec.extra[i].lambda2;
        residual[i] = (dl - l2 - ds * b.lambda1).abs() / l2.abs();
        sigma_tau[i] = ds;
    }
    let l2_max = rec
        .extra
        .iter()
        .zip(&residual)
        .filter(|(_, r)| r.is_finite())
        .map(|(e, _)| e.lambda2.abs())
        .fold(0.0, f64::max);
    let mut max_relative: f64 = 0.0;
    let mut ratio: f64 = 0.0;
    let mut samples = 0;
    for i in 0..n {
        if !residual[i].is_finite() {
            continue;
        }
        samples += 1;
        if rec.extra[i].lambda2.abs() >= floor * l2_max {
            max_relative = max_relative.max(residual[i]);
        }
        let g = rec.extra[i].gamma_norm;
        if g > 0.0 {
            ratio = ratio.max(sigma_tau[i].abs() / g);
        }
    }
    OdeResidual {
        residual,
        times: rec.times(),
        max_relative,
        sigma_tau_over_gamma: ratio,
        samples,
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IdentityResiduals {
    /// `max |dV_w/dt + K| / (1 + ||u||_H^2)`.
    pub virial: f64,
    /// `max |d<w u_t|u>/dt - (||u_t||^2 - K)| / (1 + ||u||_H^2)`.
    pub equipartition: f64,
    pub samples: usize,
}

/// Central-difference residuals of the localized virial and equipartition
/// identities over rows with `t <= t_end`.
pub fn identity_residuals(rec: &DirectionRecord, t_end: f64) -> IdentityResiduals {
    let (rows, extra) = (&rec.rows, &rec.extra);
    let mut out = IdentityResiduals {
        virial: 0.0,
        equipartition: 0.0,
        samples: 0,
    };
    for i in 1..rows.len().saturating_sub(1) {
        if rows[i + 1].t > t_end {
            break;
        }
        let dt = rows[i + 1].t - rows[i - 1].t;
        let scale = 1.0 + extra[i].norm * extra[i].norm;
        let dv = (rows[i + 1].virial - rows[i - 1].virial) / dt;
        let de = (rows[i + 1].equip - rows[i - 1].equip) / dt;
        out.virial = out.virial.max((dv + rows[i].k_value).abs() / scale);
        out.equipartition = out
            .equipartition
            .max((de - (extra[i].kinetic - rows[i].k_value)).abs() / scale);
        out.samples += 1;
    }
    out
}

/// `(lambda_1, lambda_2)` of the linearized flow from `W + eps (a1, a2) rho`.
pub fn linear_lambda(k: f64, eps: f64, a: (f64, f64), tau: f64) -> (f64, f64) {
    let (c, s) = ((k * tau).cosh(), (k * tau).sinh());
    (eps * (a.0 * c + a.1 * s / k), eps * (a.0 * k * s + a.1 * c))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LinearCheck {
    /// `max |(k dl1, dl2)| / |(k l1, l2)|` over the early samples.
    pub max_relative: f64,
    pub samples: usize,
    pub tau_end: f64,
}

/// Compares the recorded `(lambda_1, lambda_2)` against the linearized
/// prediction on fitted samples with `d_W <= dw_max`, up to the first one
/// beyond it.
pub fn linear_prediction_check(rec: &DirectionRecord, k: f64, eps: f64, a: (f64, f64), dw_max: f64) -> LinearCheck {
    let mut out = LinearCheck {
        max_relative: 0.0,
        samples: 0,
        tau_end: 0.0,
    };
    for (r, e) in rec.rows.iter().zip(&rec.extra) {
        if !(r.tau.is_finite() && r.lambda1.is_finite() && e.lambda2.is_finite()) || r.dw > dw_max {
            break;
        }
        let (l1, l2) = linear_lambda(k, eps, a, r.tau);
        let err = (k * (r.lambda1 - l1)).hypot(e.lambda2 - l2);
        let size = (k * l1).hypot(l2);
        out.max_relative = out.max_relative.max(err / size);
        out.samples += 1;
        out.tau_end = r.tau;
    }
    if out.samples == 0 {
        out.max_relative = f64::NAN;
    }
    out
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OnePassReport {
    pub exits: usize,
    pub reentries: usize,
    /// An exit above `delta` and a later re-entry below it, each with the
    /// sign functional flipping across it.
    pub violation: bool,
}

/// Scans the `d_W` series for an exit above `delta` followed by a re-entry
/// below it with the sign functional flipping across both crossings.
pub fn one_pass_check(rec: &DirectionRecord, delta: f64) -> OnePassReport {
    let pts: Vec<(f64, Option<i8>)> = rec
        .rows
        .iter()
        .zip(&rec.extra)
        .filter(|(r, _)| r.dw.is_finite())
        .map(|(r, e)| (r.dw, e.sign))
        .collect();
    let sign_before = |i: usize| pts[..i].iter().rev().find_map(|p| p.1);
    let sign_after = |i: usize| pts[i..].iter().find_map(|p| p.1);
    let flips = |i: usize| matches!((sign_before(i), sign_after(i)), (Some(a), Some(b)) if a != b);
    let mut exits = Vec::new();
    let mut entries = Vec::new();
    for i in 1..pts.len() {
        let (was_in, is_in) = (pts[i - 1].0 < delta, pts[i].0 < delta);
        if was_in && !is_in {
            exits.push(i);
        }
        if !was_in && is_in && !exits.is_empty() {
            entries.push(i);
        }
    }
    let violation = exits
        .iter()
        .any(|&x| flips(x) && entries.iter().any(|&e| e > x && flips(e)));
    OnePassReport {
        exits: exits.len(),
        reentries: entries.len(),
        violation,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(t: f64, dw: f64, lambda1: f64, sigma: f64) -> MonitorRow {
        MonitorRow {
            t,
            tau: t,
            energy: 0.0,
            k_value: 0.0,
            dw,
            lambda1,
            sigma,
            e_ext: 0.0,
            virial: 0.0,
            equip: 0.0,
        }
    }

    fn extra(lambda2: f64, sign: Option<i8>) -> MonitorExtra {
        MonitorExtra {
            norm: 1.0,
            sup_u: 1.0,
            kinetic: 0.0,
            potential_ratio: 0.0,
            lambda2,
            gamma_norm: 1.0,
            sign,
            analysis_error: None,
        }
    }

    fn synthetic(k: f64, eps: f64) -> DirectionRecord {
        let mut rec = DirectionRecord::default();
        for i in 0..80 {
            let t = 0.1 * i as f64;
            let (l1, l2) = linear_lambda(k, eps, (1.0, 0.0), t);
            rec.rows.push(row(t, k * l1.abs(), l1, 0.0));
            rec.extra.push(extra(l2, Some(-1)));
        }
        rec
    }

    #[test]
    fn ejection_fit_recovers_the_rate_of_cosh_growth() {
        let k = 1.1;
        let rec = synthetic(k, 1e-4);
        let th = Thresholds::default();
        let w = EjectionWindow::standard(rec.rows[0].dw, &th);
        let fit = fit_ejection_rate(&rec, &w).unwrap();
        assert!((fit.rate / k - 1.0).abs() < 0.02, "{}", fit.rate);
        assert!(fit.monotone);
        assert_eq!(fit.sign, 1);
        assert_eq!(fit.sigma_drift_ratio, 0.0);
    }

    #[test]
    fn short_window_is_an_error() {
        let rec = synthetic(1.1, 1e-2);
        let w = EjectionWindow {
            dw_min: 0.05,
            dw_max: 0.06,
        };
        assert!(matches!(fit_ejection_rate(&rec, &w), Err(Error::WindowTooShort(_))));
    }

    #[test]
    fn linear_solution_satisfies_the_reduced_equation() {
        let rec = synthetic(1.1, 1e-4);
        let res = modulation_ode_residual(&rec, 1.0, 0.1);
        assert!(res.samples > 50);
        assert!(res.max_relative < 0.01, "{}", res.max_relative);
        let check = linear_prediction_check(&rec, 1.1, 1e-4, (1.0, 0.0), 1.0);
        assert!(check.max_relative < 1e-12);
    }

    #[test]
    fn one_pass_flags_a_double_flip_only() {
        let mut rec = DirectionRecord::default();
        let series = [
            (1e-4, Some(-1)),
            (1e-2, Some(1)),
            (1e-2, Some(1)),
            (1e-4, Some(-1)),
        ];
        for (i, (dw, s)) in series.iter().enumerate() {
            rec.rows.push(row(i as f64, *dw, 0.0, 0.0));
            rec.extra.push(extra(0.0, *s));
        }
        let rep = one_pass_check(&rec, 1e-3);
        assert!(rep.violation);
        assert_eq!((rep.exits, rep.reentries), (1, 1));
        rec.extra[3].sign = Some(1);
        assert!(!one_pass_check(&rec, 1e-3).violation);
    }
}
