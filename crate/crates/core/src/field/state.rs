use std::sync::Arc;

use super::box3d::Box3DGrid;
use super::domain::{grad_inner, grad_sq, inner, Domain, Field};
use super::radial::RadialGrid;
use crate::error::{Error, Result};

/// A phase-space pair `(u1, u2)` in `H^1dot x L^2` on one grid.
#[derive(Clone, Debug)]
pub struct Pair<G: Domain> {
    pub grid: Arc<G>,
    pub u1: Vec<f64>,
    pub u2: Vec<f64>,
}

impl<G: Domain> Pair<G> {
    pub fn new(grid: Arc<G>, u1: Vec<f64>, u2: Vec<f64>) -> Result<Self> {
        if u1.len() != grid.len() || u2.len() != grid.len() {
            return Err(Error::GridMismatch);
        }
        if u1.iter().chain(&u2).any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("state"));
        }
        Ok(Self { grid, u1, u2 })
    }

    pub fn zeros(grid: Arc<G>) -> Self {
        let n = grid.len();
        Self {
            grid,
            u1: vec![0.0; n],
            u2: vec![0.0; n],
        }
    }

    pub fn from_fields(u1: Field<G>, u2: Field<G>) -> Result<Self> {
        if !Arc::ptr_eq(u1.grid(), u2.grid()) {
            return Err(Error::GridMismatch);
        }
        let grid = u1.grid().clone();
        Self::new(grid, u1.into_values(), u2.into_values())
    }

    pub fn first(&self) -> Field<G> {
        Field::new(self.grid.clone(), self.u1.clone()).expect("state invariant")
    }

    pub fn second(&self) -> Field<G> {
        Field::new(self.grid.clone(), self.u2.clone()).expect("state invariant")
    }

    /// `a * self + b * other`.
    pub fn combine(&self, a: f64, other: &Self, b: f64) -> Self {
        let mix = |x: &[f64], y: &[f64]| x.iter().zip(y).map(|(x, y)| a * x + b * y).collect();
        Self {
            grid: self.grid.clone(),
            u1: mix(&self.u1, &other.u1),
            u2: mix(&self.u2, &other.u2),
        }
    }

    pub fn scaled(&self, a: f64) -> Self {
        Self {
            grid: self.grid.clone(),
            u1: self.u1.iter().map(|v| a * v).collect(),
            u2: self.u2.iter().map(|v| a * v).collect(),
        }
    }

    /// `(u1, -u2)`.
    pub fn time_reversed(&self) -> Self {
        Self {
            grid: self.grid.clone(),
            u1: self.u1.clone(),
            u2: self.u2.iter().map(|v| -v).collect(),
        }
    }

    /// `||(u1, u2)||_H^2 = ||grad u1||^2 + ||u2||^2`.
    pub fn energy_norm_sq(&self) -> f64 {
        grad_sq(&*self.grid, &self.u1) + inner(&*self.grid, &self.u2, &self.u2)
    }

    pub fn energy_norm(&self) -> f64 {
        self.energy_norm_sq().max(0.0).sqrt()
    }

    /// `<self | other>_H`.
    pub fn energy_inner(&self, other: &Self) -> f64 {
        grad_inner(&*self.grid, &self.u1, &other.u1) + inner(&*self.grid, &self.u2, &other.u2)
    }
}

pub type RadialState = Pair<RadialGrid>;
pub type BoxState = Pair<Box3DGrid>;

/// A state in either representation.
#[derive(Clone, Debug)]
pub enum State {
    Radial(RadialState),
    Box3D(BoxState),
}

impl State {
    pub fn representation(&self) -> &'static str {
        match self {
            State::Radial(_) => "radial",
            State::Box3D(_) => "box3d",
        }
    }

    pub fn energy_norm(&self) -> f64 {
        match self {
            State::Radial(s) => s.energy_norm(),
            State::Box3D(s) => s.energy_norm(),
        }
    }
}

impl From<RadialState> for State {
    fn from(s: RadialState) -> Self {
        State::Radial(s)
    }
}

impl From<BoxState> for State {
    fn from(s: BoxState) -> Self {
        State::Box3D(s)
    }
}
