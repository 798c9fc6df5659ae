//! Named initial-data recipes, each sampling `(u1, u2)` on the evolution grid.

use std::path::PathBuf;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::dynamics::WaveGrid;
use crate::error::{Error, Result};
use crate::field::domain::{grad_sq, Domain};
use crate::field::ground::w_value;
use crate::field::io::read_radial;
use crate::field::state::RadialState;
use crate::registry::Registry;
use crate::spectral::SpectralData;

/// Builds the initial state of an experiment.
pub trait InitialData: Send + Sync {
    fn name(&self) -> &'static str;
    fn build(&self, spec: &SpectralData, grid: &WaveGrid) -> Result<RadialState>;
}

/// `W + eps (a1 rho, a2 rho)` with `a` one of the four unit directions.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Quadrant {
    pub a: [i8; 2],
    pub eps: f64,
}

/// Directions of the four sample data.
pub const QUADRANT_DIRECTIONS: [[i8; 2]; 4] = [[1, 0], [-1, 0], [0, 1], [0, -1]];

impl Quadrant {
    pub fn validate(&self, eps_max: f64) -> Result<()> {
        if !QUADRANT_DIRECTIONS.contains(&self.a) {
            return Err(Error::Config(format!("quadrant direction {:?} is not a unit axis vector", self.a)));
        }
        if !(self.eps > 0.0 && self.eps <= eps_max) {
            return Err(Error::Config(format!("quadrant eps = {} outside (0, {eps_max}]", self.eps)));
        }
        Ok(())
    }
}

impl InitialData for Quadrant {
    fn name(&self) -> &'static str {
        "quadrant"
    }

    fn build(&self, spec: &SpectralData, grid: &WaveGrid) -> Result<RadialState> {
        let (a1, a2) = (self.a[0] as f64 * self.eps, self.a[1] as f64 * self.eps);
        let g = grid.radial();
        RadialState::new(
            g.clone(),
            g.sample(|r| w_value(3, r) + a1 * spec.rho_at(r).0),
            g.sample(|r| a2 * spec.rho_at(r).0),
        )
    }
}

/// `(c W, 0)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScaledW {
    pub c: f64,
}

impl InitialData for ScaledW {
    fn name(&self) -> &'static str {
        "scaled-w"
    }

    fn build(&self, _spec: &SpectralData, grid: &WaveGrid) -> Result<RadialState> {
        let g = grid.radial();
        RadialState::new(g.clone(), g.sample(|r| self.c * w_value(3, r)), vec![0.0; g.len()])
    }
}

/// Gaussian shell `A exp(-((r - centre)/width)^2)` in position, and
/// `velocity` times the same profile in velocity.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Bump {
    pub amplitude: f64,
    pub width: f64,
    #[serde(default)]
    pub centre: f64,
    #[serde(default)]
    pub velocity: f64,
}

impl Bump {
    pub fn profile(&self, r: f64) -> f64 {
        let x = (r - self.centre) / self.width;
        (-x * x).exp()
    }
}

impl InitialData for Bump {
    fn name(&self) -> &'static str {
        "bump"
    }

    fn build(&self, _spec: &SpectralData, grid: &WaveGrid) -> Result<RadialState> {
        if !(self.width > 0.0) {
            return Err(Error::Config(format!("bump width must be positive, got {}", self.width)));
        }
        let g = grid.radial();
        RadialState::new(
            g.clone(),
            g.sample(|r| self.amplitude * self.profile(r)),
            g.sample(|r| self.velocity * self.profile(r)),
        )
    }
}

/// Radial text files for `u1` and optionally `u2`, interpolated onto the
/// evolution grid.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileData {
    pub u1: PathBuf,
    #[serde(default)]
    pub u2: Option<PathBuf>,
}

impl InitialData for FileData {
    fn name(&self) -> &'static str {
        "file"
    }

    fn build(&self, _spec: &SpectralData, grid: &WaveGrid) -> Result<RadialState> {
        let g = grid.radial();
        let load = |path: &PathBuf| -> Result<Vec<f64>> {
            let f = read_radial(path)?;
            if f.grid().d() != 3 {
                return Err(Error::Format(format!("{} holds a d = {} field", path.display(), f.grid().d())));
            }
            Ok(g.sample(|r| f.grid().interpolate(f.values(), r, true)))
        };
        let u1 = load(&self.u1)?;
        let u2 = match &self.u2 {
            Some(p) => load(p)?,
            None => vec![0.0; u1.len()],
        };
        RadialState::new(g.clone(), u1, u2)
    }
}

fn parse<T: DeserializeOwned>(params: &toml::Table) -> Result<T> {
    params
        .clone()
        .try_into()
        .map_err(|e: toml::de::Error| Error::Config(e.to_string()))
}

/// Recipes keyed by name; the argument is the recipe's parameter table.
pub fn recipe_registry() -> Registry<dyn InitialData, toml::Table> {
    let mut reg: Registry<dyn InitialData, toml::Table> = Registry::new("initial-data recipe");
    reg.register("quadrant", |p| Ok(Box::new(parse::<Quadrant>(p)?) as Box<dyn InitialData>));
    reg.register("scaled-w", |p| Ok(Box::new(parse::<ScaledW>(p)?) as Box<dyn InitialData>));
    reg.register("bump", |p| Ok(Box::new(parse::<Bump>(p)?) as Box<dyn InitialData>));
    reg.register("file", |p| Ok(Box::new(parse::<FileData>(p)?) as Box<dyn InitialData>));
    reg
}

/// A bump with `||.||_H = size`, used to perturb sample data.
pub fn normalized_bump(grid: &WaveGrid, bump: &Bump, size: f64) -> Result<RadialState> {
    let g = grid.radial();
    let unit = Bump {
        amplitude: 1.0,
        velocity: 0.0,
        ..bump.clone()
    };
    let p: Vec<f64> = g.sample(|r| unit.profile(r));
    let (a, v) = (bump.amplitude, bump.velocity);
    let raw_sq = a * a * grad_sq(&**g, &p) + v * v * crate::field::domain::inner(&**g, &p, &p);
    if !(raw_sq > 0.0) {
        return Err(Error::Config("perturbation bump has zero norm".into()));
    }
    let s = size / raw_sq.sqrt();
    RadialState::new(g.clone(), p.iter().map(|x| s * a * x).collect(), p.iter().map(|x| s * v * x).collect())
}
