use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::dynamics::EvolutionConfig;
use crate::error::{Error, Result};
use crate::modulation::{ModulationSettings, Thresholds};

/// `kind` selects the recipe; the remaining keys are its parameters.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RecipeSpec {
    pub kind: String,
    #[serde(flatten)]
    pub params: toml::Table,
}

/// Settings of the four-quadrant sweep.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepSpec {
    pub eps: Vec<f64>,
    /// Number of randomly perturbed variants of the sample data.
    pub perturbed: usize,
    /// Size of the perturbation in `H`, relative to `eps`.
    pub perturb_fraction: f64,
    /// Tolerance of the early-time comparison with the linearized flow.
    pub linear_tolerance: f64,
}

impl Default for SweepSpec {
    fn default() -> Self {
        Self {
            eps: vec![1e-3, 3e-3, 1e-2],
            perturbed: 0,
            perturb_fraction: 0.1,
            linear_tolerance: 0.1,
        }
    }
}

fn default_eps_max() -> f64 {
    0.05
}

/// One experiment, read from TOML.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSpec {
    pub name: String,
    pub recipe: Option<RecipeSpec>,
    #[serde(default)]
    pub evolution: EvolutionConfig,
    #[serde(default)]
    pub modulation: ModulationSettings,
    /// Overrides the calibrated distance thresholds.
    #[serde(default)]
    pub thresholds: Option<Thresholds>,
    /// Stored constants to verify the spectral build against.
    #[serde(default)]
    pub constants: Option<PathBuf>,
    #[serde(default)]
    pub out: Option<PathBuf>,
    /// Largest admissible quadrant amplitude.
    #[serde(default = "default_eps_max")]
    pub eps_max: f64,
    /// Seed of every random choice (perturbations, probes).
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub sweep: SweepSpec,
}

impl ExperimentSpec {
    pub fn named(name: &str) -> Self {
        Self {
            name: name.to_string(),
            recipe: None,
            evolution: EvolutionConfig::default(),
            modulation: ModulationSettings::default(),
            thresholds: None,
            constants: None,
            out: None,
            eps_max: default_eps_max(),
            seed: 0,
            sweep: SweepSpec::default(),
        }
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        let spec: Self = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn validate(&self) -> Result<()> {
        if self.name.is_empty() || self.name.contains(['/', '\\']) {
            return Err(Error::Config(format!("invalid experiment name '{}'", self.name)));
        }
        self.evolution.validate()?;
        if !(self.eps_max > 0.0) {
            return Err(Error::Config("eps_max must be positive".into()));
        }
        let s = &self.sweep;
        if s.eps.iter().any(|e| !(*e > 0.0 && *e <= self.eps_max)) {
            return Err(Error::Config(format!("sweep eps {:?} outside (0, {}]", s.eps, self.eps_max)));
        }
        if !(s.perturb_fraction >= 0.0 && s.linear_tolerance > 0.0) {
            return Err(Error::Config("sweep tolerances must be positive".into()));
        }
        Ok(())
    }

    pub fn thresholds(&self) -> Thresholds {
        self.thresholds.unwrap_or_default()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_a_quadrant_experiment_with_overrides() {
        let text = r#"
            name = "plus"
            seed = 7
            [recipe]
            kind = "quadrant"
            a = [1, 0]
            eps = 1e-3
            [evolution]
            t_max = 20.0
            integrator = "verlet"
        "#;
        let spec = ExperimentSpec::from_toml(text).unwrap();
        let recipe = spec.recipe.as_ref().unwrap();
        assert_eq!(recipe.kind, "quadrant");
        assert_eq!(recipe.params["eps"].as_float(), Some(1e-3));
        assert_eq!(spec.evolution.t_max, 20.0);
        assert_eq!(spec.evolution.n, EvolutionConfig::default().n);
        let again = ExperimentSpec::from_toml(&spec.to_toml().unwrap()).unwrap();
        assert_eq!(again, spec);
    }

    #[test]
    fn rejects_unknown_keys_and_bad_ranges() {
        assert!(ExperimentSpec::from_toml("name = \"x\"\nfoo = 1").is_err());
        assert!(ExperimentSpec::from_toml("name = \"x\"\n[evolution]\ncfl = 2.0").is_err());
        assert!(ExperimentSpec::from_toml("name = \"x\"\n[sweep]\neps = [0.5]").is_err());
    }
}
