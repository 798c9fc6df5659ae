//! Shared context and single experiments.

use std::fs::File;
use std::io::BufWriter;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::config::ExperimentSpec;
use super::recipes::recipe_registry;
use crate::dynamics::{fit_ejection_rate, EjectionFit, EjectionWindow, Evolver, TrajectoryRecord};
use crate::error::{Error, Result};
use crate::field::state::RadialState;
use crate::modulation::{analyze, region_predicates, sign_functional, ModulationSettings, RegionFlags, Thresholds};
use crate::spectral::{ConstantsFile, SpectralData};

/// Relative agreement required with a stored constants file.
pub const CONSTANTS_TOLERANCE: f64 = 1e-10;

/// Read-only context shared by all runs.
pub struct Lab {
    pub spec: SpectralData,
    pub settings: ModulationSettings,
    pub thresholds: Thresholds,
}

impl Lab {
    /// Builds the `d = 3` spectral data, checked against `constants` if given.
    pub fn new(settings: ModulationSettings, thresholds: Thresholds, constants: Option<&Path>) -> Result<Self> {
        let spec = SpectralData::build_default(3)?;
        if let Some(path) = constants {
            if !path.exists() {
                return Err(Error::Config(format!("missing constants file {}", path.display())));
            }
            spec.verify_against(&ConstantsFile::read(path)?, CONSTANTS_TOLERANCE)?;
        }
        Ok(Self {
            spec,
            settings,
            thresholds,
        })
    }

    pub fn for_experiment(exp: &ExperimentSpec) -> Result<Self> {
        Self::new(exp.modulation.clone(), exp.thresholds(), exp.constants.as_deref())
    }
}

/// Static description of the initial datum.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct InitialSummary {
    pub energy: f64,
    /// `E - J(W)`.
    pub excess: f64,
    pub k_value: f64,
    pub dw: f64,
    pub sign: Option<i8>,
    pub regions: RegionFlags,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ExperimentOutcome {
    pub name: String,
    pub seed: u64,
    pub initial: InitialSummary,
    pub ejection: Option<EjectionFit>,
    pub record: TrajectoryRecord,
}

impl ExperimentOutcome {
    /// Writes the two monitor CSVs and the JSON sidecar.
    pub fn write(&self, dir: &Path) -> Result<()> {
        std::fs::create_dir_all(dir)?;
        self.record.forward.write_csv(&dir.join(format!("{}_forward.csv", self.name)))?;
        self.record.backward.write_csv(&dir.join(format!("{}_backward.csv", self.name)))?;
        let f = BufWriter::new(File::create(dir.join(format!("{}.json", self.name)))?);
        serde_json::to_writer_pretty(f, self)?;
        Ok(())
    }
}

pub fn summarize(lab: &Lab, state: &RadialState) -> Result<InitialSummary> {
    let a = analyze(&lab.spec, state, &lab.settings, &lab.thresholds, None, false)?;
    Ok(InitialSummary {
        energy: a.energy,
        excess: a.excess,
        k_value: a.k_value,
        dw: a.report.dw,
        sign: sign_functional(&a, &lab.thresholds).ok(),
        regions: region_predicates(&a, &lab.thresholds),
    })
}

/// Evolves `state0` in both directions and fits the ejection rate on the
/// first direction that has a usable window.
pub fn run_state(lab: &Lab, exp: &ExperimentSpec, state0: &RadialState) -> Result<ExperimentOutcome> {
    let evolver = Evolver::new(&lab.spec, &exp.evolution, &lab.settings, &lab.thresholds)?;
    let initial = summarize(lab, state0)?;
    let mut record = evolver.evolve_with_monitors(state0)?;
    let window = EjectionWindow::standard(initial.dw, &lab.thresholds);
    let ejection = fit_ejection_rate(&record.forward, &window)
        .or_else(|_| fit_ejection_rate(&record.backward, &window))
        .ok();
    record.ejection_rate_fit = ejection.as_ref().map(|f| f.rate);
    Ok(ExperimentOutcome {
        name: exp.name.clone(),
        seed: exp.seed,
        initial,
        ejection,
        record,
    })
}

/// Builds the recipe's initial data, runs it and writes the artifacts to
/// `exp.out` when set.
pub fn run_experiment(lab: &Lab, exp: &ExperimentSpec) -> Result<ExperimentOutcome> {
    exp.validate()?;
    let recipe = exp
        .recipe
        .as_ref()
        .ok_or_else(|| Error::Config(format!("experiment '{}' has no recipe", exp.name)))?;
    if recipe.kind == "quadrant" {
        let q: super::recipes::Quadrant = recipe
            .params
            .clone()
            .try_into()
            .map_err(|e: toml::de::Error| Error::Config(e.to_string()))?;
        q.validate(exp.eps_max)?;
    }
    let data = recipe_registry().create(&recipe.kind, &recipe.params)?;
    let grid = exp.evolution.grid()?;
    let state0 = data.build(&lab.spec, &grid)?;
    let outcome = run_state(lab, exp, &state0)?;
    if let Some(dir) = &exp.out {
        outcome.write(dir)?;
    }
    Ok(outcome)
}
