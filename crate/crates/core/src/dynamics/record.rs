//! Monitor samples, verdicts and their CSV / JSON forms.

use std::fs::File;
use std::io::BufWriter;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::Result;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Verdict {
    Blowup,
    Scatter,
    Undetermined,
}

impl std::fmt::Display for Verdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Verdict::Blowup => "Blowup",
            Verdict::Scatter => "Scatter",
            Verdict::Undetermined => "Undetermined",
        })
    }
}

/// One CSV row. Quantities that are undefined at a sample are NaN.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MonitorRow {
    pub t: f64,
    pub tau: f64,
    #[serde(rename = "E")]
    pub energy: f64,
    #[serde(rename = "K")]
    pub k_value: f64,
    #[serde(rename = "dW")]
    pub dw: f64,
    pub lambda1: f64,
    pub sigma: f64,
    #[serde(rename = "Eext")]
    pub e_ext: f64,
    #[serde(rename = "Vw")]
    pub virial: f64,
    pub equip: f64,
}

/// Quantities kept alongside each row in the JSON sidecar.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MonitorExtra {
    pub norm: f64,
    pub sup_u: f64,
    /// `||u2||_2^2`.
    pub kinetic: f64,
    /// `||u||_{2*}^{2*} / ||u||_H^2`.
    pub potential_ratio: f64,
    pub lambda2: f64,
    pub gamma_norm: f64,
    /// Value of the sign functional, when defined.
    pub sign: Option<i8>,
    pub analysis_error: Option<String>,
}

/// Evidence collected when the norm detector fires.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BlowupEvidence {
    pub t_detect: f64,
    pub norm: f64,
    pub sup_u: f64,
    /// Start of the confirmation re-run.
    pub t_checkpoint: f64,
    /// Crossing time of the refined re-run, if it crossed.
    pub t_confirm: Option<f64>,
    pub confirmed: bool,
}

/// Monitors and verdict of one time direction.
#[derive(Clone, Debug, Default, Serialize, Deserialize)]
pub struct DirectionRecord {
    #[serde(skip)]
    pub rows: Vec<MonitorRow>,
    pub extra: Vec<MonitorExtra>,
    pub verdict: Option<Verdict>,
    pub reason: String,
    pub blowup: Option<BlowupEvidence>,
    pub steps: usize,
    pub runtime_s: f64,
}

impl DirectionRecord {
    pub fn verdict(&self) -> Verdict {
        self.verdict.unwrap_or(Verdict::Undetermined)
    }

    pub fn times(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.t).collect()
    }

    pub fn series(&self, f: impl Fn(&MonitorRow) -> f64) -> Vec<f64> {
        self.rows.iter().map(f).collect()
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut w = csv::Writer::from_path(path)?;
        for row in &self.rows {
            w.serialize(row)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn read_csv(path: &Path) -> Result<Vec<MonitorRow>> {
        let mut r = csv::Reader::from_path(path)?;
        Ok(r.deserialize().collect::<std::result::Result<_, _>>()?)
    }
}

/// Forward and backward monitors of one initial datum.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TrajectoryRecord {
    pub verdict_forward: Verdict,
    pub verdict_backward: Verdict,
    /// Fitted ejection rate of `|lambda_1|` in `tau`, when a window exists.
    pub ejection_rate_fit: Option<f64>,
    pub forward: DirectionRecord,
    pub backward: DirectionRecord,
}

impl TrajectoryRecord {
    pub fn new(forward: DirectionRecord, backward: DirectionRecord) -> Self {
        Self {
            verdict_forward: forward.verdict(),
            verdict_backward: backward.verdict(),
            ejection_rate_fit: None,
            forward,
            backward,
        }
    }

    /// Writes `<stem>_forward.csv`, `<stem>_backward.csv` and `<stem>.json`.
    pub fn write(&self, dir: &Path, stem: &str) -> Result<()> {
        std::fs::create_dir_all(dir)?;
        self.forward.write_csv(&dir.join(format!("{stem}_forward.csv")))?;
        self.backward.write_csv(&dir.join(format!("{stem}_backward.csv")))?;
        let f = BufWriter::new(File::create(dir.join(format!("{stem}.json")))?);
        serde_json::to_writer_pretty(f, self)?;
        Ok(())
    }
}
